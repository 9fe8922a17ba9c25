#include "unhaze/io/pfm_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "unhaze/core/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "PFM I/O assumes a little-endian host");

namespace unhaze {

namespace {

// Reads one whitespace-delimited header token.
std::string read_token(std::istream& in) {
  std::string tok;
  in >> tok;
  if (tok.empty()) throw FormatError("truncated PFM header");
  return tok;
}

struct PfmHeader {
  int channels = 0;
  int width = 0;
  int height = 0;
};

PfmHeader read_header(std::istream& in, const std::string& name) {
  const std::string magic = read_token(in);
  PfmHeader h;
  if (magic == "Pf") {
    h.channels = 1;
  } else if (magic == "PF") {
    h.channels = 3;
  } else {
    throw FormatError(name + ": not a PFM file (magic '" + magic + "')");
  }
  try {
    h.width = std::stoi(read_token(in));
    h.height = std::stoi(read_token(in));
    const double scale = std::stod(read_token(in));
    if (scale >= 0.0) throw FormatError(name + ": big-endian PFM not supported");
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception&) {
    throw FormatError(name + ": malformed PFM header");
  }
  if (h.width <= 0 || h.height <= 0) throw FormatError(name + ": bad PFM dimensions");
  in.get();  // single whitespace byte terminating the header
  return h;
}

Image load_pfm_impl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const PfmHeader h = read_header(in, path.string());

  Image img(h.height, h.width, h.channels);
  std::vector<float> row(static_cast<size_t>(h.width) * h.channels);
  // PFM rows are stored bottom-up.
  for (int y = h.height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) throw FormatError(path.string() + ": truncated PFM data");
    for (int x = 0; x < h.width; ++x) {
      for (int c = 0; c < h.channels; ++c) {
        img[c](y, x) = row[static_cast<size_t>(x) * h.channels + c];
      }
    }
  }
  return img;
}

void save_pfm_impl(const Image& img, const std::filesystem::path& path) {
  const int channels = img.channels();
  if (channels != 1 && channels != 3) throw ShapeError("PFM supports 1 or 3 channels");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << (channels == 1 ? "Pf" : "PF") << "\n"
      << img.width() << " " << img.height() << "\n"
      << "-1.0\n";
  std::vector<float> row(static_cast<size_t>(img.width()) * channels);
  for (int y = img.height() - 1; y >= 0; --y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < channels; ++c) {
        row[static_cast<size_t>(x) * channels + c] = static_cast<float>(img[c](y, x));
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

Image load_pfm(const std::filesystem::path& path) { return load_pfm_impl(path); }

Plane load_pfm_gray(const std::filesystem::path& path) {
  Image img = load_pfm_impl(path);
  if (img.channels() != 1) {
    throw FormatError(path.string() + ": expected grayscale PFM (magic 'Pf')");
  }
  return img[0];
}

void save_pfm(const Plane& map, const std::filesystem::path& path) {
  Image wrapper;
  wrapper.planes.push_back(map);
  save_pfm_impl(wrapper, path);
}

void save_pfm(const Image& img, const std::filesystem::path& path) {
  save_pfm_impl(img, path);
}

}  // namespace unhaze
