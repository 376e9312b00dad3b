#pragma once

#include <array>
#include <vector>

namespace pathgan {

// Row-major interleaved (y, x, channel) raster of doubles.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c), data(static_cast<size_t>(w) * h * c, fill) {}

  double& at(int y, int x, int c) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  const double& at(int y, int x, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
};

// Single-channel nonnegative raster (saliency values or grayscale pixels).
struct SaliencyMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major

  SaliencyMap() = default;
  SaliencyMap(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

  double& at(int y, int x) { return values[static_cast<size_t>(y) * width + x]; }
  double at(int y, int x) const { return values[static_cast<size_t>(y) * width + x]; }
};

// Grayscale carrier to model input: values scaled by 1/maxval and replicated
// across channels.
Image to_image(const SaliencyMap& m, int maxval, int channels = 3);

// Bilinear resampling (half-pixel centers, edges clamped). Identity when the
// target equals the source size.
Image bilinear_resize(const Image& src, int out_w, int out_h);

std::array<double, 3> channel_means(const Image& img);

}  // namespace pathgan
