#pragma once

#include <filesystem>

#include "unhaze/core/types.hpp"

namespace unhaze {

// Portable Float Map I/O. Grayscale maps use magic "Pf", 3-channel images
// "PF"; the scale header is -1.0 (little-endian float32) and rows are stored
// bottom-up. Round trips are bitwise for any value already representable in
// float32 (everything this library writes).
Image load_pfm(const std::filesystem::path& path);
Plane load_pfm_gray(const std::filesystem::path& path);

void save_pfm(const Plane& map, const std::filesystem::path& path);
void save_pfm(const Image& img, const std::filesystem::path& path);

}  // namespace unhaze
