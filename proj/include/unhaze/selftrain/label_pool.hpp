#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "unhaze/core/types.hpp"
#include "unhaze/iqa/scoring.hpp"

namespace unhaze {

// Best-ever pseudo label for one real image.
struct LabelPoolEntry {
  std::string image_id;
  Image pseudo_image;       // stored on the 8-bit grid (round-trip exact)
  Transmission pseudo_t;
  TrustWeight weight;
  PatchScores scores;
  int round = 0;
};

struct PoolOptions {
  int n_patches = 8;
  WeightCombine combine = WeightCombine::kProduct;
  // kMean: accept when both mean scores strictly improve (default).
  // kDominance: accept only when every patch strictly improves on both maps.
  // kFrozen: accept only the first insertion; afterwards the pool is
  // read-only (used to isolate tuner behavior from label churn).
  enum class Accept { kMean, kDominance, kFrozen };
  Accept accept = Accept::kMean;
};

// Persistent store of best-ever pseudo labels, one directory per image id:
//   <dir>/manifest.json
//   <dir>/<id>/pseudo.png, trans.pfm, weight.pfm, scores.json
// Candidates are quantized to the 8-bit grid before scoring so that scores
// recomputed from the stored PNG are exact. Files are written before the
// manifest is atomically replaced (write-temp-rename), so a crash never
// leaves the manifest pointing at missing data. Not thread-safe: updates
// follow a single-writer discipline.
class LabelPool {
 public:
  LabelPool(std::filesystem::path dir, PoolOptions options);

  // Opens an existing pool, adopting the scoring options recorded in its
  // manifest (acceptance mode is not persisted; the default applies).
  static LabelPool open(const std::filesystem::path& dir);

  struct UpdateResult {
    LabelPoolEntry pseudo;  // current best-ever entry (candidate if accepted)
    bool accepted = false;
  };

  // Scores the candidate, applies the acceptance rule (first insertion is
  // unconditional), persists on accept, and returns the best-ever entry.
  UpdateResult update(const std::string& image_id, const Image& candidate,
                      const Transmission& candidate_t, int round);

  bool contains(const std::string& image_id) const;
  LabelPoolEntry load_entry(const std::string& image_id) const;

  struct Row {
    std::string image_id;
    int round = 0;
    double mean_d = 0.0;
    double mean_q = 0.0;
  };
  std::vector<Row> rows() const;  // sorted by id

  // Recomputes file hashes, scores, and weight maps from the stored files;
  // throws PoolError on any mismatch.
  void verify() const;

  const std::filesystem::path& dir() const { return dir_; }
  const PoolOptions& options() const { return options_; }

 private:
  struct ManifestEntry {
    int round = 0;
    double mean_d = 0.0;
    double mean_q = 0.0;
    std::map<std::string, std::string> file_hashes;
  };

  void load_manifest();
  void save_manifest() const;
  std::filesystem::path entry_dir(const std::string& image_id) const;

  std::filesystem::path dir_;
  PoolOptions options_;
  std::map<std::string, ManifestEntry> entries_;
};

}  // namespace unhaze
