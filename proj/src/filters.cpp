#include "nirfuse/filters.hpp"

#include <algorithm>
#include <cmath>

namespace nirfuse {

int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

Image box_mean(const Image& img, int radius) {
  if (radius < 0) throw ArgumentError("box_mean: radius must be >= 0");
  const int w = img.width(), h = img.height();
  Image out(w, h, img.channels(), img.kind());
  std::vector<double> sat(static_cast<std::size_t>(w + 1) * (h + 1));
  auto S = [&](int y, int x) -> double& { return sat[static_cast<std::size_t>(y) * (w + 1) + x]; };
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      double row = 0.0;
      for (int x = 0; x < w; ++x) {
        row += img.at(c, y, x);
        S(y + 1, x + 1) = S(y, x + 1) + row;
      }
    }
    for (int y = 0; y < h; ++y) {
      const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
      for (int x = 0; x < w; ++x) {
        const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
        const double sum = S(y1 + 1, x1 + 1) - S(y0, x1 + 1) - S(y1 + 1, x0) + S(y0, x0);
        out.at(c, y, x) = sum / static_cast<double>((y1 - y0 + 1) * (x1 - x0 + 1));
      }
    }
  }
  return out;
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  if (size < 1 || size % 2 == 0) throw ArgumentError("gaussian kernel size must be odd and positive");
  if (sigma <= 0.0) sigma = 0.3 * ((size - 1) * 0.5 - 1.0) + 0.8;
  const int half = size / 2;
  std::vector<double> taps(static_cast<std::size_t>(size));
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - half;
    taps[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += taps[static_cast<std::size_t>(i)];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

Image gaussian_blur(const Image& img, int size, double sigma) {
  const auto taps = gaussian_kernel(size, sigma);
  const int half = size / 2;
  const int w = img.width(), h = img.height();
  Image tmp(w, h, img.channels(), img.kind());
  Image out(w, h, img.channels(), img.kind());
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int k = -half; k <= half; ++k) {
          acc += taps[static_cast<std::size_t>(k + half)] * img.at(c, y, reflect101(x + k, w));
        }
        tmp.at(c, y, x) = acc;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int k = -half; k <= half; ++k) {
          acc += taps[static_cast<std::size_t>(k + half)] * tmp.at(c, reflect101(y + k, h), x);
        }
        out.at(c, y, x) = acc;
      }
    }
  }
  return out;
}

namespace {

Image sobel(const Image& img, bool horizontal) {
  const int w = img.width(), h = img.height();
  Image out(w, h, img.channels(), ImageKind::FEATURE);
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      const int ym = reflect101(y - 1, h), yp = reflect101(y + 1, h);
      for (int x = 0; x < w; ++x) {
        const int xm = reflect101(x - 1, w), xp = reflect101(x + 1, w);
        double v = 0.0;
        if (horizontal) {
          v = (img.at(c, ym, xp) - img.at(c, ym, xm)) + 2.0 * (img.at(c, y, xp) - img.at(c, y, xm)) +
              (img.at(c, yp, xp) - img.at(c, yp, xm));
        } else {
          v = (img.at(c, yp, xm) - img.at(c, ym, xm)) + 2.0 * (img.at(c, yp, x) - img.at(c, ym, x)) +
              (img.at(c, yp, xp) - img.at(c, ym, xp));
        }
        out.at(c, y, x) = v;
      }
    }
  }
  return out;
}

template <typename Pick>
Image window_extreme(const Image& img, int radius, Pick pick) {
  if (radius < 0) throw ArgumentError("window radius must be >= 0");
  const int w = img.width(), h = img.height();
  Image tmp(w, h, img.channels(), img.kind());
  Image out(w, h, img.channels(), img.kind());
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double v = img.at(c, y, x);
        for (int k = std::max(0, x - radius); k <= std::min(w - 1, x + radius); ++k) {
          v = pick(v, img.at(c, y, k));
        }
        tmp.at(c, y, x) = v;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double v = tmp.at(c, y, x);
        for (int k = std::max(0, y - radius); k <= std::min(h - 1, y + radius); ++k) {
          v = pick(v, tmp.at(c, k, x));
        }
        out.at(c, y, x) = v;
      }
    }
  }
  return out;
}

}  // namespace

Image sobel_x(const Image& img) { return sobel(img, true); }
Image sobel_y(const Image& img) { return sobel(img, false); }

Image window_max(const Image& img, int radius) {
  return window_extreme(img, radius, [](double a, double b) { return std::max(a, b); });
}

Image window_min(const Image& img, int radius) {
  return window_extreme(img, radius, [](double a, double b) { return std::min(a, b); });
}

}  // namespace nirfuse
