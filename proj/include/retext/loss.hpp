#pragma once

#include "retext/rng.hpp"
#include "retext/sparse.hpp"

namespace retext {

// Negative-sampling style loss weighting: every target-support component
// gets positive_weight, and negatives_per_positive absence components per
// positive are drawn uniformly without replacement and weighted 1.
struct NegSampleCfg {
  int negatives_per_positive = 5;
  double positive_weight = 1.0;
};

// sum over alpha's support of alpha[j] * (z[j] - p[j])^2. Components outside
// alpha's support never contribute, which is what lets training skip them.
double weighted_square_loss(const std::vector<double>& p, const SparseVec& z,
                            const SparseVec& alpha);

// Weight vector for one target. An empty target still draws
// negatives_per_positive negatives (one virtual positive) so the example
// trains.
SparseVec sample_weights(const SparseVec& z, const NegSampleCfg& cfg, Rng& rng);

}  // namespace retext
