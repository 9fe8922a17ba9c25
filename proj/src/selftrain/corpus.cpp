#include "unhaze/selftrain/corpus.hpp"

#include <algorithm>

#include "unhaze/core/error.hpp"
#include "unhaze/io/pfm_io.hpp"
#include "unhaze/io/png_io.hpp"

namespace unhaze {

namespace fs = std::filesystem;

std::vector<SyntheticTriple> load_synthetic_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("synthetic corpus dir missing: " + dir.string());
  std::vector<fs::path> subdirs;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory() && fs::exists(e.path() / "hazy.png")) subdirs.push_back(e.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  std::vector<SyntheticTriple> out;
  out.reserve(subdirs.size());
  for (const fs::path& d : subdirs) {
    SyntheticTriple s;
    s.id = d.filename().string();
    s.lq = load_png(d / "hazy.png");
    s.gt = load_png(d / "gt.png");
    s.t = Transmission{load_pfm_gray(d / "trans.pfm")};
    require_same_shape(s.lq, s.gt);
    require_same_shape(s.lq, s.t);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<RealSample> load_real_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("real corpus dir missing: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RealSample> out;
  out.reserve(files.size());
  for (const fs::path& f : files) {
    out.push_back(RealSample{f.stem().string(), load_png(f)});
  }
  return out;
}

}  // namespace unhaze
