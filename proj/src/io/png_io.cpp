#include "unhaze/io/png_io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "unhaze/core/error.hpp"

namespace unhaze {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngErrorState {
  std::string message;
};

// libpng error handlers may not return; the classic contract is longjmp back
// into the caller, which then cleans up and throws a C++ exception.
void png_error_fn(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  if (state) state->message = msg ? msg : "unknown libpng error";
  png_longjmp(png, 1);
}

void png_warn_fn(png_structp, png_const_charp) {}

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriter() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
  }
};

}  // namespace

double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

Image load_png(const std::filesystem::path& path, bool linearize) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path.string());

  PngErrorState err;
  PngReader r;
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warn_fn);
  if (!r.png) throw IoError("png reader allocation failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) throw IoError("png info allocation failed");

  Image img;
  std::vector<unsigned char> row;
  // Control returns here with nonzero on any libpng decode error.
  if (setjmp(png_jmpbuf(r.png))) {
    throw FormatError(path.string() + ": " + err.message);
  }

  png_init_io(r.png, file.get());
  png_read_info(r.png, r.info);

  const png_uint_32 w = png_get_image_width(r.png, r.info);
  const png_uint_32 h = png_get_image_height(r.png, r.info);
  const int depth = png_get_bit_depth(r.png, r.info);
  const int color = png_get_color_type(r.png, r.info);

  if (depth != 8 && depth != 16) {
    throw FormatError(path.string() + ": only 8- or 16-bit PNG supported");
  }
  if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_RGB) {
    throw FormatError(path.string() + ": only grayscale or RGB PNG supported");
  }
  const int channels = (color == PNG_COLOR_TYPE_RGB) ? 3 : 1;
  const double maxval = (depth == 8) ? 255.0 : 65535.0;

  img = Image(static_cast<int>(h), static_cast<int>(w), channels);
  row.resize(static_cast<size_t>(w) * channels * (depth / 8));
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(r.png, row.data(), nullptr);
    for (png_uint_32 x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        double v;
        if (depth == 8) {
          v = row[static_cast<size_t>(x) * channels + c] / maxval;
        } else {
          // PNG stores 16-bit samples big-endian.
          const size_t k = (static_cast<size_t>(x) * channels + c) * 2;
          v = ((row[k] << 8) | row[k + 1]) / maxval;
        }
        if (linearize) v = srgb_to_linear(v);
        img[c](static_cast<int>(y), static_cast<int>(x)) = v;
      }
    }
  }
  png_read_end(r.png, nullptr);
  return img;
}

void save_png(const Image& img, const std::filesystem::path& path) {
  require_valid(img);
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw IoError("cannot write " + path.string());

  // Pack all rows up front so no pixel math runs inside the setjmp region.
  const int channels = img.channels();
  std::vector<unsigned char> bytes(static_cast<size_t>(img.height()) * img.width() * channels);
  std::vector<png_bytep> rows(static_cast<size_t>(img.height()));
  for (int y = 0; y < img.height(); ++y) {
    png_bytep row = bytes.data() + static_cast<size_t>(y) * img.width() * channels;
    rows[static_cast<size_t>(y)] = row;
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < channels; ++c) {
        row[static_cast<size_t>(x) * channels + c] = quantize8(img[c](y, x));
      }
    }
  }

  PngErrorState err;
  PngWriter w;
  w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warn_fn);
  if (!w.png) throw IoError("png writer allocation failed");
  w.info = png_create_info_struct(w.png);
  if (!w.info) throw IoError("png info allocation failed");

  // Volatile: read after setjmp, so they must survive the longjmp error path.
  const volatile png_uint_32 height = static_cast<png_uint_32>(img.height());
  const volatile png_uint_32 width = static_cast<png_uint_32>(img.width());
  const volatile int color_type = channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;

  if (setjmp(png_jmpbuf(w.png))) {
    throw IoError(path.string() + ": " + err.message);
  }

  png_init_io(w.png, file.get());
  png_set_compression_level(w.png, 6);
  png_set_IHDR(w.png, w.info, width, height, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  png_write_image(w.png, rows.data());
  png_write_end(w.png, nullptr);
  if (std::fflush(file.get()) != 0) throw IoError("flush failed for " + path.string());
}

}  // namespace unhaze
