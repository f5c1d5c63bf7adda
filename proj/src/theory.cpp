#include "retext/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>

#include "retext/linalg.hpp"
#include "retext/rng.hpp"

namespace retext {

namespace {

constexpr double kRankTol = 1e-8;
constexpr double kCondLimit = 1e10;
constexpr long kEnumGuard = 1000000;

void check_stochastic_columns(const Matrix& m, const char* what) {
  for (int j = 0; j < m.cols(); ++j) {
    double sum = 0.0;
    for (int i = 0; i < m.rows(); ++i) {
      if (m(i, j) < 0.0)
        throw std::invalid_argument(std::string(what) + ": negative entry");
      sum += m(i, j);
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument(std::string(what) +
                                  ": column does not sum to 1");
  }
}

}  // namespace

void TwoViewModel::validate() const {
  if (hidden() < 1 || x1() < 1 || x2() < 1 || y() < 1)
    throw std::invalid_argument("two-view model: empty dimension");
  if (px1_h.cols() != hidden() || px2_h.cols() != hidden() ||
      py_h.cols() != hidden())
    throw std::invalid_argument("two-view model: table shapes disagree");
  double sum = 0.0;
  for (double p : ph) {
    if (p < 0.0) throw std::invalid_argument("P(h): negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("P(h) does not sum to 1");
  check_stochastic_columns(px1_h, "P(X1|h)");
  check_stochastic_columns(px2_h, "P(X2|h)");
  check_stochastic_columns(py_h, "P(Y|h)");
}

namespace {

Vec random_simplex(Rng& rng, int n) {
  Vec v(n);
  double sum = 0.0;
  for (double& x : v) {
    x = rng.unit();
    sum += x;
  }
  for (double& x : v) x /= sum;
  return v;
}

Matrix random_stochastic(Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    Vec col = random_simplex(rng, rows);
    for (int i = 0; i < rows; ++i) m(i, j) = col[i];
  }
  return m;
}

struct JointTables {
  Matrix joint12;  // |X1| x |X2|
  Vec px1, px2;
  Matrix a;   // P(X2|X1): |X2| x |X1|
  Matrix c;   // P(h|X1):  |H| x |X1|
  Matrix py_x1;      // P(Y|X1): |Y| x |X1|, by direct enumeration
  Matrix ph_x2;      // P(h|X2): |H| x |X2|
  Matrix a2;         // P(X1|X2): |X1| x |X2|
  std::vector<Matrix> py_x1x2;  // per x1: |Y| x |X2|, by direct enumeration
};

// Every conditional the checks need, computed by brute-force enumeration of
// the generative model's joint distribution.
JointTables enumerate_joints(const TwoViewModel& m) {
  const int k = m.hidden(), d1 = m.x1(), d2 = m.x2(), dy = m.y();
  JointTables t;
  t.joint12 = Matrix(d1, d2);
  for (int x1 = 0; x1 < d1; ++x1)
    for (int x2 = 0; x2 < d2; ++x2) {
      double s = 0.0;
      for (int h = 0; h < k; ++h)
        s += m.ph[h] * m.px1_h(x1, h) * m.px2_h(x2, h);
      t.joint12(x1, x2) = s;
    }
  t.px1.assign(d1, 0.0);
  t.px2.assign(d2, 0.0);
  for (int x1 = 0; x1 < d1; ++x1)
    for (int x2 = 0; x2 < d2; ++x2) {
      t.px1[x1] += t.joint12(x1, x2);
      t.px2[x2] += t.joint12(x1, x2);
    }
  for (int x1 = 0; x1 < d1; ++x1)
    if (t.px1[x1] <= 0.0)
      throw std::invalid_argument("P(x1) = 0 for some x1; conditionals undefined");
  for (int x2 = 0; x2 < d2; ++x2)
    if (t.px2[x2] <= 0.0)
      throw std::invalid_argument("P(x2) = 0 for some x2; conditionals undefined");

  t.a = Matrix(d2, d1);
  t.a2 = Matrix(d1, d2);
  for (int x1 = 0; x1 < d1; ++x1)
    for (int x2 = 0; x2 < d2; ++x2) {
      t.a(x2, x1) = t.joint12(x1, x2) / t.px1[x1];
      t.a2(x1, x2) = t.joint12(x1, x2) / t.px2[x2];
    }

  t.c = Matrix(k, d1);
  t.ph_x2 = Matrix(k, d2);
  for (int h = 0; h < k; ++h) {
    for (int x1 = 0; x1 < d1; ++x1)
      t.c(h, x1) = m.ph[h] * m.px1_h(x1, h) / t.px1[x1];
    for (int x2 = 0; x2 < d2; ++x2)
      t.ph_x2(h, x2) = m.ph[h] * m.px2_h(x2, h) / t.px2[x2];
  }

  t.py_x1 = Matrix(dy, d1);
  for (int x1 = 0; x1 < d1; ++x1)
    for (int y = 0; y < dy; ++y) {
      double s = 0.0;
      for (int h = 0; h < k; ++h)
        s += m.ph[h] * m.px1_h(x1, h) * m.py_h(y, h);
      t.py_x1(y, x1) = s / t.px1[x1];
    }

  t.py_x1x2.reserve(d1);
  for (int x1 = 0; x1 < d1; ++x1) {
    Matrix cond(dy, d2);
    for (int x2 = 0; x2 < d2; ++x2) {
      Vec joint(dy, 0.0);
      double z = 0.0;
      for (int y = 0; y < dy; ++y) {
        for (int h = 0; h < k; ++h)
          joint[y] += m.ph[h] * m.px1_h(x1, h) * m.px2_h(x2, h) * m.py_h(y, h);
        z += joint[y];
      }
      for (int y = 0; y < dy; ++y) cond(y, x2) = joint[y] / z;
    }
    t.py_x1x2.push_back(std::move(cond));
  }
  return t;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double r = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      r = std::max(r, std::abs(a(i, j) - b(i, j)));
  return r;
}

}  // namespace

TwoViewModel sample_two_view_model(int k, int nx1, int nx2, int ny,
                                   std::uint32_t seed) {
  if (k < 1 || ny < 1) throw std::invalid_argument("k and |Y| must be >= 1");
  if (nx1 < k || nx2 < k)
    throw std::invalid_argument("|X1| and |X2| must be >= |H| for the rank condition");
  Rng rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    TwoViewModel m;
    m.ph = random_simplex(rng, k);
    m.px1_h = random_stochastic(rng, nx1, k);
    m.px2_h = random_stochastic(rng, nx2, k);
    m.py_h = random_stochastic(rng, ny, k);
    const JointTables t = enumerate_joints(m);
    const Vec sv = singular_values(t.a);
    if (sv[k - 1] > kRankTol) return m;
  }
  throw std::runtime_error("sample_two_view_model: resample budget exhausted");
}

bool TwoViewReport::all_pass() const {
  if (!assumption_ok) return false;
  for (const auto& c : checks)
    if (!c.pass) return false;
  return !checks.empty();
}

std::string TwoViewReport::to_text() const {
  std::string out;
  char buf[160];
  if (!diagnostic.empty()) out += "DIAG " + diagnostic + "\n";
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "%s %s %.6e %.6e\n",
                  c.pass ? "PASS" : "FAIL", c.name.c_str(), c.residual, c.tol);
    out += buf;
  }
  return out;
}

TwoViewReport verify_two_view(const TwoViewModel& model, double tol) {
  model.validate();
  TwoViewReport report;
  const int k = model.hidden(), d1 = model.x1(), d2 = model.x2(),
            dy = model.y();

  const JointTables t = enumerate_joints(model);
  const Vec sv = singular_values(t.a);
  report.sigma_k = sv[k - 1];
  if (report.sigma_k <= kRankTol) {
    report.assumption_ok = false;
    report.diagnostic =
        "rank of [P(X2|X1)] is below the hidden state count (sigma_k = " +
        std::to_string(report.sigma_k) + "); conditional independence with "
        "full rank does not hold, checks skipped";
    return report;
  }
  report.assumption_ok = true;

  // U = (B^T B)^-1 B^T with B = [P(X2|h)].
  const Matrix& b = model.px2_h;
  const Matrix btb = matmul(transpose(b), b);
  report.btb_condition = spd_condition(btb);
  if (report.btb_condition > kCondLimit)
    report.diagnostic = "B^T B is ill-conditioned (condition " +
                        std::to_string(report.btb_condition) +
                        "); pseudo-inverse used";
  const Matrix u = matmul(spd_pseudo_inverse(btb), transpose(b));

  auto add_check = [&](std::string name, double residual) {
    report.checks.push_back(
        TwoViewCheck{std::move(name), residual, tol, residual < tol});
  };

  // (a) C = U A as a matrix identity.
  add_check("c_equals_ua", max_abs_diff(t.c, matmul(u, t.a)));

  // The embedding under test: f1(x1) is the x1 column of A, so that
  // g1(f1(x1), x2) = f1(x1)[x2] reproduces P(X2|X1) by construction.
  auto f1 = [&](int x1) {
    Vec e(d2);
    for (int x2 = 0; x2 < d2; ++x2) e[x2] = t.a(x2, x1);
    return e;
  };
  auto f2 = [&](int x2) {
    Vec e(d1);
    for (int x1 = 0; x1 < d1; ++x1) e[x1] = t.a2(x1, x2);
    return e;
  };
  // t1(a1, h) = sum_x2 g1(a1, x2) u(h, x2).
  auto t1 = [&](const Vec& a1, int h) {
    double s = 0.0;
    for (int x2 = 0; x2 < d2; ++x2) s += a1[x2] * u(h, x2);
    return s;
  };
  // Mirror construction for the second view.
  const Matrix b2tb2 = matmul(transpose(model.px1_h), model.px1_h);
  const Matrix u2 = matmul(spd_pseudo_inverse(b2tb2), transpose(model.px1_h));
  auto t2 = [&](const Vec& a2col, int h) {
    double s = 0.0;
    for (int x1 = 0; x1 < d1; ++x1) s += a2col[x1] * u2(h, x1);
    return s;
  };

  // (b) P(h|X1) = t1(f1(X1), h).
  {
    double r = 0.0;
    for (int x1 = 0; x1 < d1; ++x1) {
      const Vec a1 = f1(x1);
      for (int h = 0; h < k; ++h)
        r = std::max(r, std::abs(t.c(h, x1) - t1(a1, h)));
    }
    add_check("hidden_posterior_via_t1", r);
  }

  // (c) P(Y|X1) = q1(f1(X1), Y) with q1(a1, y) = sum_h t1(a1, h) P(y|h).
  {
    double r = 0.0;
    for (int x1 = 0; x1 < d1; ++x1) {
      const Vec a1 = f1(x1);
      for (int y = 0; y < dy; ++y) {
        double q1 = 0.0;
        for (int h = 0; h < k; ++h) q1 += t1(a1, h) * model.py_h(y, h);
        r = std::max(r, std::abs(t.py_x1(y, x1) - q1));
      }
    }
    add_check("label_posterior_via_q1", r);
  }

  // (d) P(Y|X1,X2) through the two-view posterior
  // P(h|x1,x2) ∝ t1(f1(x1),h) t2(f2(x2),h) / P(h).
  {
    double r = 0.0;
    for (int x1 = 0; x1 < d1; ++x1) {
      const Vec a1 = f1(x1);
      for (int x2 = 0; x2 < d2; ++x2) {
        const Vec a2col = f2(x2);
        Vec post(k);
        double z = 0.0;
        for (int h = 0; h < k; ++h) {
          post[h] = t1(a1, h) * t2(a2col, h) / model.ph[h];
          z += post[h];
        }
        for (int y = 0; y < dy; ++y) {
          double q = 0.0;
          for (int h = 0; h < k; ++h) q += post[h] / z * model.py_h(y, h);
          r = std::max(r, std::abs(t.py_x1x2[x1](y, x2) - q));
        }
      }
    }
    add_check("two_view_label_posterior", r);
  }

  return report;
}

double RetexNet::eval(const SparseVec& x) const {
  double out = 0.0;
  for (int i = 0; i < w.rows(); ++i) {
    const double* row = w.row(i);
    double a = b[i];
    for (const auto& [j, val] : x.pairs) a += row[j] * val;
    if (a > 0.0) out += v[i] * a;
  }
  return out;
}

SparseVec seq_region_vec(const std::vector<int>& word_ids, int vocab_size) {
  SparseVec x(static_cast<int>(word_ids.size()) * vocab_size);
  for (std::size_t i = 0; i < word_ids.size(); ++i) {
    if (word_ids[i] < 0 || word_ids[i] >= vocab_size)
      throw std::invalid_argument("seq_region_vec: word id out of range");
    x.pairs.emplace_back(static_cast<int>(i) * vocab_size + word_ids[i], 1.0);
  }
  return x;
}

void for_each_region(int vocab_size, int m,
                     const std::function<void(const std::vector<int>&)>& fn) {
  if (vocab_size < 1 || m < 1)
    throw std::invalid_argument("for_each_region: need vocab_size, m >= 1");
  long total = 1;
  for (int i = 0; i < m; ++i) {
    total *= vocab_size;
    if (total > kEnumGuard)
      throw std::invalid_argument(
          "for_each_region: more than 10^6 regions; enumeration refused");
  }
  std::vector<int> ids(m, 0);
  for (long r = 0; r < total; ++r) {
    fn(ids);
    for (int i = m - 1; i >= 0; --i) {
      if (++ids[i] < vocab_size) break;
      ids[i] = 0;
    }
  }
}

RetexNet retex_universal(const std::vector<double>& f, int vocab_size, int m) {
  long total = 1;
  for (int i = 0; i < m; ++i) {
    total *= vocab_size;
    if (total > kEnumGuard)
      throw std::invalid_argument("retex_universal: more than 10^6 regions");
  }
  if (static_cast<long>(f.size()) != total)
    throw std::invalid_argument(
        "retex_universal: table size must be |V|^m (one value per region)");

  const int d = m * vocab_size;
  RetexNet net;
  net.w = Matrix(static_cast<int>(total), d);
  net.b.assign(total, 0.0);
  net.v.assign(total, 0.0);
  long row = 0;
  for_each_region(vocab_size, m, [&](const std::vector<int>& ids) {
    double* wrow = net.w.row(static_cast<int>(row));
    for (int j = 0; j < d; ++j) wrow[j] = -1.0;
    for (int i = 0; i < m; ++i) wrow[i * vocab_size + ids[i]] = 1.0;
    net.b[row] = -static_cast<double>(m) + 1.0;  // -|S_i| + 1, |S_i| = m
    net.v[row] = f[row];
    ++row;
  });
  return net;
}

bool concept_contains(const SimpleConcept& c,
                      const std::vector<int>& word_ids) {
  if (word_ids.size() != c.groups.size())
    throw std::invalid_argument("concept_contains: region size mismatch");
  for (std::size_t i = 0; i < c.groups.size(); ++i) {
    const bool in_group =
        std::find(c.groups[i].begin(), c.groups[i].end(), word_ids[i]) !=
        c.groups[i].end();
    if (c.signs[i] > 0 ? !in_group : in_group) return false;
  }
  return true;
}

ConceptUnit retex_simple_concept(const SimpleConcept& c, int vocab_size) {
  if (c.groups.size() != c.signs.size() || c.groups.empty())
    throw std::invalid_argument("simple concept: need one sign per word group");
  const int m = c.region_size();
  ConceptUnit unit;
  unit.w.assign(static_cast<std::size_t>(m) * vocab_size, 0.0);
  double b = 1.0;
  for (int i = 0; i < m; ++i) {
    if (c.signs[i] != 1 && c.signs[i] != -1)
      throw std::invalid_argument("simple concept: signs must be +1 or -1");
    for (int word : c.groups[i]) {
      if (word < 0 || word >= vocab_size)
        throw std::invalid_argument("simple concept: word id out of range");
      unit.w[static_cast<std::size_t>(i) * vocab_size + word] = c.signs[i];
    }
    b -= (c.signs[i] + 1) / 2.0;
  }
  unit.b = b;
  return unit;
}

RetexNet retex_union(const std::vector<SimpleConcept>& concepts,
                     int vocab_size) {
  if (concepts.empty())
    throw std::invalid_argument("retex_union: need at least one concept");
  const int m = concepts.front().region_size();
  RetexNet net;
  net.w = Matrix(static_cast<int>(concepts.size()), m * vocab_size);
  net.b.assign(concepts.size(), 0.0);
  net.v.assign(concepts.size(), 1.0);
  for (std::size_t i = 0; i < concepts.size(); ++i) {
    if (concepts[i].region_size() != m)
      throw std::invalid_argument("retex_union: concepts disagree on region size");
    ConceptUnit unit = retex_simple_concept(concepts[i], vocab_size);
    double* row = net.w.row(static_cast<int>(i));
    for (int j = 0; j < m * vocab_size; ++j) row[j] = unit.w[j];
    net.b[i] = unit.b;
  }
  return net;
}

}  // namespace retext
