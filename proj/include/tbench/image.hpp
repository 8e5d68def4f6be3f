#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace tbench {

/// Dense raster with values in [0,1], row-major, channel-interleaved.
/// Pixel data stays real-valued end to end; quantization to bytes happens
/// only at the PPM/PGM file boundary.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;  // 1 (gray) or 3 (color)
  std::vector<double> data;

  static Image zeros(int height, int width, int channels);

  double& at(int y, int x, int c) {
    return data[static_cast<std::size_t>((y * width + x) * channels + c)];
  }
  double at(int y, int x, int c) const {
    return data[static_cast<std::size_t>((y * width + x) * channels + c)];
  }

  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
  std::size_t value_count() const { return data.size(); }

  /// Throws ShapeError if the shape/data-length/value-range invariants fail.
  void validate() const;
};

/// Binary P6 (3-channel) or P5 (1-channel), maxval 255. Values are quantized
/// with round-half-up: byte = floor(255*v + 0.5).
void save_ppm(const Image& image, const std::filesystem::path& path);

/// Loads P6/P5 with maxval 255; bytes scale to [0,1] by /255.
Image load_ppm(const std::filesystem::path& path);

}  // namespace tbench
