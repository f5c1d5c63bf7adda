#pragma once

#include <string>

#include "retext/train.hpp"
#include "retext/tv.hpp"

namespace retext {

// A parsed `key = value` configuration file. Besides the TrainConfig it
// carries the embedding-target settings used by tv training. Unknown keys
// are errors.
struct RunConfig {
  TrainConfig train;
  NegSampleCfg neg;

  TargetKind target_kind = TargetKind::kUnsupervised;
  bool target_distinguish = false;
  bool target_distinguish_set = false;  // key present in the file
  double target_tau = 0.0;
  bool target_binarize = true;
  std::string target_stoplist;

  // Left/right context sides are merged for bow-style view-1 vectors and
  // distinguished for seq-style ones unless the file says otherwise.
  bool distinguish_sides() const {
    if (target_distinguish_set) return target_distinguish;
    return train.spec.mode == RegionMode::kSeq;
  }
};

RunConfig parse_config_text(const std::string& text, const std::string& origin);
RunConfig load_config(const std::string& path);

}  // namespace retext
