#include "lss3d/image.hpp"

#include <fstream>
#include <stdexcept>

namespace lss3d {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error("ppm: " + what); }

/// Skip PPM whitespace and '#' comments; returns the next token start.
std::size_t skip_separators(const std::vector<std::uint8_t>& bytes, std::size_t at) {
  while (at < bytes.size()) {
    const char c = static_cast<char>(bytes[at]);
    if (c == '#') {
      while (at < bytes.size() && bytes[at] != '\n') ++at;
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++at;
    } else {
      break;
    }
  }
  return at;
}

int read_int(const std::vector<std::uint8_t>& bytes, std::size_t& at, const char* what) {
  at = skip_separators(bytes, at);
  if (at >= bytes.size()) fail(std::string("truncated header before ") + what);
  long value = 0;
  bool any = false;
  while (at < bytes.size() && bytes[at] >= '0' && bytes[at] <= '9') {
    value = value * 10 + (bytes[at] - '0');
    if (value > 1 << 24) fail(std::string(what) + " out of range");
    ++at;
    any = true;
  }
  if (!any) fail(std::string("expected integer for ") + what);
  return static_cast<int>(value);
}

}  // namespace

Image8 make_image(int width, int height, std::uint8_t fill) {
  if (width < 1 || height < 1) throw std::invalid_argument("make_image: empty size");
  Image8 img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height * 3, fill);
  return img;
}

Image8 decode_ppm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') fail("not a P6 file");
  std::size_t at = 2;
  Image8 img;
  img.width = read_int(bytes, at, "width");
  img.height = read_int(bytes, at, "height");
  const int maxval = read_int(bytes, at, "maxval");
  if (img.width < 1 || img.height < 1) fail("empty image");
  if (maxval != 255) fail("maxval must be 255");
  if (at >= bytes.size()) fail("truncated after header");
  const char sep = static_cast<char>(bytes[at]);
  if (sep != ' ' && sep != '\t' && sep != '\n' && sep != '\r') fail("missing separator after maxval");
  ++at;
  const std::size_t need = static_cast<std::size_t>(img.width) * img.height * 3;
  if (bytes.size() - at < need) fail("truncated pixel data");
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(at),
                    bytes.begin() + static_cast<std::ptrdiff_t>(at + need));
  return img;
}

std::vector<std::uint8_t> encode_ppm(const Image8& image) {
  if (image.byte_count() != image.pixels.size())
    throw std::invalid_argument("encode_ppm: pixel buffer does not match size");
  const std::string header =
      "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), image.pixels.begin(), image.pixels.end());
  return bytes;
}

Image8 read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_ppm(bytes);
}

void write_ppm(const std::string& path, const Image8& image) {
  const std::vector<std::uint8_t> bytes = encode_ppm(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write image: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
  if (!out) throw std::runtime_error("short write: " + path);
}

}  // namespace lss3d
