#include "mmot/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mmot {

namespace {

std::vector<std::uint8_t> read_rgb8(const std::string& path, std::size_t& w, std::size_t& h) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw std::runtime_error("cannot read " + path + ": " + img.message);
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&img);
    throw std::runtime_error("cannot decode " + path + ": " + img.message);
  }
  w = img.width;
  h = img.height;
  return buf;
}

void write_rgb8(const std::string& path, const std::vector<std::uint8_t>& buf, std::size_t w,
                std::size_t h) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(w);
  img.height = static_cast<png_uint_32>(h);
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr))
    throw std::runtime_error("cannot write " + path + ": " + img.message);
}

std::uint8_t to_byte(double x) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(255.0 * x), 0L, 255L));
}

}  // namespace

ImageGrid read_png(const std::string& path) {
  std::size_t w = 0, h = 0;
  auto buf = read_rgb8(path, w, h);
  std::vector<Rgb> px(w * h);
  for (std::size_t i = 0; i < px.size(); ++i)
    for (std::size_t c = 0; c < 3; ++c) px[i][c] = buf[3 * i + c] / 255.0;
  return ImageGrid(w, h, std::move(px));
}

void write_png(const std::string& path, const ImageGrid& img) {
  std::vector<std::uint8_t> buf(3 * img.size());
  for (std::size_t i = 0; i < img.size(); ++i)
    for (std::size_t c = 0; c < 3; ++c) buf[3 * i + c] = to_byte(img.pixel(i)[c]);
  write_rgb8(path, buf, img.width(), img.height());
}

void write_gray_png(const std::string& path, std::span<const double> values, std::size_t width,
                    std::size_t height) {
  if (values.size() != width * height) throw std::invalid_argument("write_gray_png: size mismatch");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double span = *hi - *lo;
  std::vector<std::uint8_t> buf(3 * values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto b = to_byte(span > 0 ? (values[i] - *lo) / span : 0.0);
    buf[3 * i] = buf[3 * i + 1] = buf[3 * i + 2] = b;
  }
  write_rgb8(path, buf, width, height);
}

Vector png_intensity(const std::string& path, std::size_t* width, std::size_t* height) {
  std::size_t w = 0, h = 0;
  auto buf = read_rgb8(path, w, h);
  Vector v(w * h);
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = (buf[3 * i] + buf[3 * i + 1] + buf[3 * i + 2]) / (3.0 * 255.0);
  if (width) *width = w;
  if (height) *height = h;
  return v;
}

}  // namespace mmot
