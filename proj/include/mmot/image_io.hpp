#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "mmot/apps.hpp"

namespace mmot {

// 8-bit RGB PNG; channels map to [0,1] by /255 and back by round(255 x).
ImageGrid read_png(const std::string& path);
void write_png(const std::string& path, const ImageGrid& img);

// Values min-max scaled to 8-bit gray.
void write_gray_png(const std::string& path, std::span<const double> values, std::size_t width,
                    std::size_t height);

// Mean of the three channels per pixel.
Vector png_intensity(const std::string& path, std::size_t* width = nullptr,
                     std::size_t* height = nullptr);

}  // namespace mmot
