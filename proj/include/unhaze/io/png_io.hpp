#pragma once

#include <filesystem>

#include "unhaze/core/types.hpp"

namespace unhaze {

// Loads an 8- or 16-bit grayscale/RGB PNG; intensities are divided by the
// bit-depth maximum. `linearize` applies the sRGB electro-optical transfer
// function (off by default: the solver operates on stored intensities).
Image load_png(const std::filesystem::path& path, bool linearize = false);

// Writes an 8-bit grayscale/RGB PNG with round-half-to-even quantization.
// Output bytes are deterministic: fixed compression level, no ancillary
// chunks.
void save_png(const Image& img, const std::filesystem::path& path);

double srgb_to_linear(double v);

}  // namespace unhaze
