#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "retext/matrix.hpp"
#include "retext/sparse.hpp"

namespace retext {

// Finite two-view generative model: hidden state h, views x1 and x2, and a
// label y that are conditionally independent given h. Conditional tables are
// column-stochastic (one column per hidden state).
struct TwoViewModel {
  Vec ph;        // |H|
  Matrix px1_h;  // |X1| x |H|
  Matrix px2_h;  // |X2| x |H|
  Matrix py_h;   // |Y| x |H|

  int hidden() const { return static_cast<int>(ph.size()); }
  int x1() const { return px1_h.rows(); }
  int x2() const { return px2_h.rows(); }
  int y() const { return py_h.rows(); }

  void validate() const;  // non-negative, columns sum to 1 within 1e-12
};

// Seeded random model; rejection-resampled until the k-th singular value of
// [P(X2|X1)] exceeds 1e-8 so the rank condition holds.
TwoViewModel sample_two_view_model(int k, int nx1, int nx2, int ny,
                                   std::uint32_t seed);

struct TwoViewCheck {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct TwoViewReport {
  bool assumption_ok = false;
  double sigma_k = 0.0;       // k-th singular value of [P(X2|X1)]
  double btb_condition = 0.0; // condition number of B^T B
  std::string diagnostic;     // set when checks are skipped
  std::vector<TwoViewCheck> checks;

  bool all_pass() const;
  std::string to_text() const;  // one PASS/FAIL line per check
};

// Numerically reproduces the hidden-state recovery argument on a concrete
// model: with A = [P(X2|X1)], B = [P(X2|h)], C = [P(h|X1)] and
// U = (B^T B)^-1 B^T it checks, at the given tolerance,
//   (a) C = U A,
//   (b) P(h|X1) recovered through t1 applied to the embedding f1(x1) = A[:,x1],
//   (c) P(Y|X1) recovered through q1,
//   (d) P(Y|X1,X2) recovered through the two-view posterior formula.
// A rank-deficient model yields a diagnostic instead of numeric failures.
TwoViewReport verify_two_view(const TwoViewModel& model, double tol);

// Region embedding of the form max(0, W x + b) with a linear read-out v.
struct RetexNet {
  Matrix w;
  Vec b;
  Vec v;

  double eval(const SparseVec& x) const;
};

// Seq-representation vector of a word-id tuple over a vocabulary of the
// given size.
SparseVec seq_region_vec(const std::vector<int>& word_ids, int vocab_size);

// One network row per possible region: the row fires exactly on its region,
// and the read-out weight carries the function value, so the net reproduces
// f exactly on every region. f is indexed by the region's lexicographic
// rank (most significant word first).
RetexNet retex_universal(const std::vector<double>& f, int vocab_size, int m);

// Region set defined positionally: position i must (sign +1) or must not
// (sign -1) hold a word of group i.
struct SimpleConcept {
  std::vector<std::vector<int>> groups;  // word ids per position
  std::vector<int> signs;                // +1 or -1 per position

  int region_size() const { return static_cast<int>(groups.size()); }
};

bool concept_contains(const SimpleConcept& c, const std::vector<int>& word_ids);

// Single embedding dimension whose rectified output is exactly the concept's
// indicator function.
struct ConceptUnit {
  Vec w;
  double b = 0.0;
};

ConceptUnit retex_simple_concept(const SimpleConcept& c, int vocab_size);

// q rows, one per concept, all-ones read-out: the output counts satisfied
// concepts, so it is positive exactly on the union.
RetexNet retex_union(const std::vector<SimpleConcept>& concepts,
                     int vocab_size);

// Walks every word-id tuple in R_m (lexicographic order) while the count
// stays within the enumeration guard of 10^6 regions.
void for_each_region(int vocab_size, int m,
                     const std::function<void(const std::vector<int>&)>& fn);

}  // namespace retext
