#include "unhaze/selftrain/label_pool.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "unhaze/core/error.hpp"
#include "unhaze/core/rng.hpp"
#include "unhaze/io/pfm_io.hpp"
#include "unhaze/io/png_io.hpp"
#include "unhaze/solver/serialize.hpp"

namespace unhaze {

namespace fs = std::filesystem;

namespace {

const char* const kPoolFiles[] = {"pseudo.png", "trans.pfm", "weight.pfm", "scores.json"};

std::string hash_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PoolError("missing pool file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return hex;
}

std::string combine_name(WeightCombine c) {
  return c == WeightCombine::kProduct ? "product" : "sum";
}

void check_id(const std::string& id) {
  if (id.empty() || id.find('/') != std::string::npos ||
      id.find('\\') != std::string::npos || id == "." || id == "..") {
    throw ConfigError("invalid pool image id '" + id + "'");
  }
}

}  // namespace

LabelPool::LabelPool(fs::path dir, PoolOptions options)
    : dir_(std::move(dir)), options_(options) {
  if (options_.n_patches < 1) throw ConfigError("pool n_patches must be >= 1");
  fs::create_directories(dir_);
  if (fs::exists(dir_ / "manifest.json")) {
    load_manifest();
  } else {
    save_manifest();
  }
}

LabelPool LabelPool::open(const fs::path& dir) {
  const fs::path manifest = dir / "manifest.json";
  if (!fs::exists(manifest)) throw PoolError("no pool manifest at " + manifest.string());
  const nlohmann::json j = load_json_file(manifest);
  PoolOptions options;
  try {
    options.n_patches = j.at("n_patches").get<int>();
    const std::string combine = j.at("combine").get<std::string>();
    if (combine == "product") {
      options.combine = WeightCombine::kProduct;
    } else if (combine == "sum") {
      options.combine = WeightCombine::kSum;
    } else {
      throw PoolError("unknown pool combine mode '" + combine + "'");
    }
  } catch (const nlohmann::json::exception& ex) {
    throw PoolError("corrupt pool manifest: " + std::string(ex.what()));
  }
  return LabelPool(dir, options);
}

void LabelPool::load_manifest() {
  const nlohmann::json j = load_json_file(dir_ / "manifest.json");
  try {
    if (j.at("version").get<int>() != 1) throw PoolError("unsupported pool version");
    const int n = j.at("n_patches").get<int>();
    const std::string combine = j.at("combine").get<std::string>();
    if (n != options_.n_patches || combine != combine_name(options_.combine)) {
      throw PoolError("pool at " + dir_.string() +
                      " was built with different scoring options");
    }
    for (const auto& [id, e] : j.at("entries").items()) {
      ManifestEntry entry;
      entry.round = e.at("round").get<int>();
      entry.mean_d = e.at("mean_d").get<double>();
      entry.mean_q = e.at("mean_q").get<double>();
      for (const auto& [name, hash] : e.at("files").items()) {
        entry.file_hashes[name] = hash.get<std::string>();
      }
      entries_[id] = std::move(entry);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw PoolError("corrupt pool manifest: " + std::string(ex.what()));
  }
}

void LabelPool::save_manifest() const {
  nlohmann::json entries = nlohmann::json::object();
  for (const auto& [id, e] : entries_) {
    nlohmann::json files = nlohmann::json::object();
    for (const auto& [name, hash] : e.file_hashes) files[name] = hash;
    entries[id] = {{"round", e.round},
                   {"mean_d", e.mean_d},
                   {"mean_q", e.mean_q},
                   {"files", files}};
  }
  const nlohmann::json manifest{{"version", 1},
                                {"n_patches", options_.n_patches},
                                {"combine", combine_name(options_.combine)},
                                {"entries", entries}};
  const fs::path tmp = dir_ / "manifest.json.tmp";
  save_json_file(manifest, tmp);
  fs::rename(tmp, dir_ / "manifest.json");
}

fs::path LabelPool::entry_dir(const std::string& image_id) const { return dir_ / image_id; }

bool LabelPool::contains(const std::string& image_id) const {
  return entries_.count(image_id) > 0;
}

LabelPoolEntry LabelPool::load_entry(const std::string& image_id) const {
  const auto it = entries_.find(image_id);
  if (it == entries_.end()) throw PoolError("no pool entry for '" + image_id + "'");
  const fs::path d = entry_dir(image_id);
  LabelPoolEntry entry;
  entry.image_id = image_id;
  entry.round = it->second.round;
  try {
    entry.pseudo_image = load_png(d / "pseudo.png");
    entry.pseudo_t = Transmission{load_pfm_gray(d / "trans.pfm")};
    entry.weight = TrustWeight{load_pfm_gray(d / "weight.pfm")};
    entry.scores = patch_scores_from_json(load_json_file(d / "scores.json"));
  } catch (const Error& e) {
    throw PoolError("cannot load pool entry '" + image_id + "': " + e.what());
  }
  return entry;
}

LabelPool::UpdateResult LabelPool::update(const std::string& image_id,
                                          const Image& candidate,
                                          const Transmission& candidate_t, int round) {
  check_id(image_id);
  require_valid(candidate);
  require_same_shape(candidate, candidate_t);

  // Snap to the 8-bit grid first: the stored PNG then reproduces these exact
  // values, making verify()'s recomputation exact.
  const Image snapped = quantized8(candidate);
  const PatchScores scores = score_image(snapped, options_.n_patches);

  const auto it = entries_.find(image_id);
  bool accept = false;
  if (it == entries_.end()) {
    accept = true;  // first insertion is unconditional
  } else {
    switch (options_.accept) {
      case PoolOptions::Accept::kMean: {
        accept = scores.mean_d() > it->second.mean_d && scores.mean_q() > it->second.mean_q;
        break;
      }
      case PoolOptions::Accept::kDominance: {
        const PatchScores stored =
            patch_scores_from_json(load_json_file(entry_dir(image_id) / "scores.json"));
        accept = (scores.d > stored.d).all() && (scores.q > stored.q).all();
        break;
      }
      case PoolOptions::Accept::kFrozen:
        accept = false;
        break;
    }
  }

  if (!accept) return UpdateResult{load_entry(image_id), false};

  LabelPoolEntry entry;
  entry.image_id = image_id;
  entry.pseudo_image = snapped;
  entry.pseudo_t = candidate_t;
  entry.weight = trust_weight(scores, candidate.height(), candidate.width(), options_.combine);
  entry.scores = scores;
  entry.round = round;

  const fs::path d = entry_dir(image_id);
  fs::create_directories(d);
  save_png(entry.pseudo_image, d / "pseudo.png");
  save_pfm(entry.pseudo_t.map, d / "trans.pfm");
  save_pfm(entry.weight.map, d / "weight.pfm");
  save_json_file(to_json(entry.scores), d / "scores.json");

  ManifestEntry m;
  m.round = round;
  m.mean_d = scores.mean_d();
  m.mean_q = scores.mean_q();
  for (const char* name : kPoolFiles) m.file_hashes[name] = hash_file(d / name);
  entries_[image_id] = std::move(m);
  save_manifest();

  // Hand back the float-narrowed maps exactly as a later load would see them.
  entry.pseudo_t.map = entry.pseudo_t.map.cast<float>().cast<double>();
  entry.weight.map = entry.weight.map.cast<float>().cast<double>();
  return UpdateResult{std::move(entry), true};
}

std::vector<LabelPool::Row> LabelPool::rows() const {
  std::vector<Row> out;
  out.reserve(entries_.size());
  for (const auto& [id, e] : entries_) out.push_back(Row{id, e.round, e.mean_d, e.mean_q});
  return out;
}

void LabelPool::verify() const {
  for (const auto& [id, e] : entries_) {
    const fs::path d = entry_dir(id);
    for (const char* name : kPoolFiles) {
      const auto it = e.file_hashes.find(name);
      if (it == e.file_hashes.end()) throw PoolError("manifest missing hash for " + std::string(name));
      const std::string actual = hash_file(d / name);
      if (actual != it->second) {
        throw PoolError("hash mismatch for " + (d / name).string());
      }
    }
    const Image pseudo = load_png(d / "pseudo.png");
    const PatchScores recomputed = score_image(pseudo, options_.n_patches);
    const PatchScores stored = patch_scores_from_json(load_json_file(d / "scores.json"));
    if (stored.n != recomputed.n ||
        (stored.d - recomputed.d).abs().maxCoeff() > 1e-12 ||
        (stored.q - recomputed.q).abs().maxCoeff() > 1e-12) {
      throw PoolError("stored scores disagree with recomputation for '" + id + "'");
    }
    if (std::abs(e.mean_d - recomputed.mean_d()) > 1e-12 ||
        std::abs(e.mean_q - recomputed.mean_q()) > 1e-12) {
      throw PoolError("manifest mean scores disagree with recomputation for '" + id + "'");
    }
    const Plane stored_w = load_pfm_gray(d / "weight.pfm");
    const TrustWeight w =
        trust_weight(recomputed, pseudo.height(), pseudo.width(), options_.combine);
    if ((stored_w - w.map).abs().maxCoeff() > 1e-6) {
      throw PoolError("stored trust weight disagrees with recomputation for '" + id + "'");
    }
  }
}

}  // namespace unhaze
