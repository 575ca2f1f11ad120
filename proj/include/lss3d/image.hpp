#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lss3d {

/// 8-bit RGB raster, row-major, interleaved channels. Stored and exchanged
/// as binary PPM (P6), which keeps image round-trips byte-exact without an
/// image codec dependency.
struct Image8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3 bytes

  bool same_shape(const Image8& other) const {
    return width == other.width && height == other.height;
  }
  std::size_t byte_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
  }
  std::uint8_t& at(int x, int y, int channel) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + channel];
  }
  std::uint8_t at(int x, int y, int channel) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + channel];
  }
};

Image8 make_image(int width, int height, std::uint8_t fill = 0);

/// Decode a binary PPM (magic "P6", maxval 255). Throws std::runtime_error
/// on malformed input.
Image8 decode_ppm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_ppm(const Image8& image);

Image8 read_ppm(const std::string& path);
void write_ppm(const std::string& path, const Image8& image);

/// Whole-file helpers shared by the dataset loaders.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace lss3d
