#include "pathgan/image.hpp"

#include <algorithm>
#include <cmath>

#include "pathgan/error.hpp"

namespace pathgan {

Image to_image(const SaliencyMap& m, int maxval, int channels) {
  Image img(m.width, m.height, channels);
  const double scale = maxval > 0 ? 1.0 / static_cast<double>(maxval) : 1.0;
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      const double v = m.at(y, x) * scale;
      for (int c = 0; c < channels; ++c) img.at(y, x, c) = v;
    }
  }
  return img;
}

Image bilinear_resize(const Image& src, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) fail(Err::ShapeMismatch, "resize target must be positive");
  if (out_w == src.width && out_h == src.height) return src;
  Image dst(out_w, out_h, src.channels);
  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < src.channels; ++c) {
        const double top = src.at(y0, x0, c) * (1.0 - wx) + src.at(y0, x1, c) * wx;
        const double bot = src.at(y1, x0, c) * (1.0 - wx) + src.at(y1, x1, c) * wx;
        dst.at(y, x, c) = top * (1.0 - wy) + bot * wy;
      }
    }
  }
  return dst;
}

std::array<double, 3> channel_means(const Image& img) {
  std::array<double, 3> mean = {0.0, 0.0, 0.0};
  const size_t pixels = static_cast<size_t>(img.width) * img.height;
  if (pixels == 0) return mean;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels && c < 3; ++c) mean[c] += img.at(y, x, c);
    }
  }
  for (double& m : mean) m /= static_cast<double>(pixels);
  return mean;
}

}  // namespace pathgan
