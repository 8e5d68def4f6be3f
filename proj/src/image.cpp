#include "tbench/image.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>

#include "tbench/error.hpp"

namespace tbench {

Image Image::zeros(int height, int width, int channels) {
  Image img;
  img.height = height;
  img.width = width;
  img.channels = channels;
  img.data.assign(static_cast<std::size_t>(height) * width * channels, 0.0);
  return img;
}

void Image::validate() const {
  if (height <= 0 || width <= 0)
    throw ShapeError("image: non-positive dimensions");
  if (channels != 1 && channels != 3)
    throw ShapeError("image: channels must be 1 or 3, got " +
                     std::to_string(channels));
  if (data.size() != static_cast<std::size_t>(height) * width * channels)
    throw ShapeError("image: data length does not match dimensions");
  for (double v : data) {
    if (!(v >= 0.0 && v <= 1.0))
      throw ShapeError("image: value outside [0,1]");
  }
}

void save_ppm(const Image& image, const std::filesystem::path& path) {
  image.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());

  out << (image.channels == 3 ? "P6" : "P5") << "\n"
      << image.width << " " << image.height << "\n255\n";
  std::vector<unsigned char> bytes;
  bytes.reserve(image.data.size());
  for (double v : image.data)
    bytes.push_back(static_cast<unsigned char>(std::floor(255.0 * v + 0.5)));
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

// Skips PPM whitespace and '#' comment lines between header tokens.
int next_header_int(std::istream& in, const std::filesystem::path& path) {
  int c = in.get();
  while (c != EOF && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c))
    throw IoError("malformed PPM header: " + path.string());
  long value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    if (value > 1 << 20) throw IoError("malformed PPM header: " + path.string());
    c = in.get();
  }
  if (c != EOF) in.unget();
  return static_cast<int>(value);
}

}  // namespace

Image load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());

  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  int channels;
  if (m0 == 'P' && m1 == '6') channels = 3;
  else if (m0 == 'P' && m1 == '5') channels = 1;
  else throw IoError("malformed PPM header (expected P6 or P5): " + path.string());

  int width = next_header_int(in, path);
  int height = next_header_int(in, path);
  int maxval = next_header_int(in, path);
  if (width <= 0 || height <= 0)
    throw IoError("malformed PPM header (bad dimensions): " + path.string());
  if (maxval != 255)
    throw IoError("unsupported PPM maxval (want 255): " + path.string());
  in.get();  // single whitespace byte after maxval

  std::size_t n = static_cast<std::size_t>(width) * height * channels;
  std::vector<unsigned char> bytes(n);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw IoError("truncated pixel data: " + path.string());

  Image img;
  img.height = height;
  img.width = width;
  img.channels = channels;
  img.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) img.data[i] = bytes[i] / 255.0;
  return img;
}

}  // namespace tbench
