#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "unhaze/core/types.hpp"

namespace unhaze {

// One labeled synthetic sample: hazy observation, clear ground truth, and
// the transmission used to compose it.
struct SyntheticTriple {
  std::string id;
  Image lq;
  Image gt;
  Transmission t;
};

// One unlabeled real hazy image.
struct RealSample {
  std::string id;
  Image image;
};

// Loads a synthesized corpus: each subdirectory <id>/ holds hazy.png, gt.png
// and trans.pfm. Entries are returned sorted by id.
std::vector<SyntheticTriple> load_synthetic_corpus(const std::filesystem::path& dir);

// Loads a flat directory of real hazy PNGs, sorted by filename stem.
std::vector<RealSample> load_real_corpus(const std::filesystem::path& dir);

}  // namespace unhaze
