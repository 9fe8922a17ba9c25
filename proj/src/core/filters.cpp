#include "unhaze/core/filters.hpp"

#include <algorithm>
#include <cmath>

#include "unhaze/core/error.hpp"

namespace unhaze {

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

namespace {

// One-dimensional box pass along the rows of p (i.e. smoothing across
// columns); the vertical pass reuses it via transposition.
Plane box_rows(const Plane& p, int radius) {
  const int h = static_cast<int>(p.rows());
  const int w = static_cast<int>(p.cols());
  const int r = std::min(radius, w - 1);
  if (r <= 0) return p;
  Plane out(h, w);
  std::vector<double> prefix(static_cast<size_t>(w + 2 * r + 1));
  for (int y = 0; y < h; ++y) {
    prefix[0] = 0.0;
    for (int k = 0; k < w + 2 * r; ++k) {
      prefix[static_cast<size_t>(k + 1)] =
          prefix[static_cast<size_t>(k)] + p(y, reflect_index(k - r, w));
    }
    for (int x = 0; x < w; ++x) {
      out(y, x) = (prefix[static_cast<size_t>(x + 2 * r + 1)] - prefix[static_cast<size_t>(x)]) /
                  (2 * r + 1);
    }
  }
  return out;
}

Plane min_rows(const Plane& p, int radius) {
  const int h = static_cast<int>(p.rows());
  const int w = static_cast<int>(p.cols());
  if (radius <= 0) return p;
  Plane out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - radius);
      const int x1 = std::min(w - 1, x + radius);
      double m = p(y, x0);
      for (int k = x0 + 1; k <= x1; ++k) m = std::min(m, p(y, k));
      out(y, x) = m;
    }
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<size_t>(i + r)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

// Convolve along rows with an odd symmetric kernel, mirror padding.
Plane convolve_rows(const Plane& p, const std::vector<double>& kernel) {
  const int h = static_cast<int>(p.rows());
  const int w = static_cast<int>(p.cols());
  const int r = static_cast<int>(kernel.size() / 2);
  Plane out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) {
        acc += kernel[static_cast<size_t>(k + r)] * p(y, reflect_index(x + k, w));
      }
      out(y, x) = acc;
    }
  }
  return out;
}

}  // namespace

Plane box_mean(const Plane& p, int radius) {
  if (radius < 0) throw ConfigError("box filter radius must be non-negative");
  return box_rows(box_rows(p, radius).transpose(), radius).transpose();
}

Plane min_filter(const Plane& p, int radius) {
  if (radius < 0) throw ConfigError("min filter radius must be non-negative");
  return min_rows(min_rows(p, radius).transpose(), radius).transpose();
}

Plane dark_channel(const Image& img, int window) {
  if (window < 1 || window % 2 == 0) throw ConfigError("dark channel window must be odd");
  Plane mc = img[0];
  for (int c = 1; c < img.channels(); ++c) mc = mc.min(img[c]);
  return min_filter(mc, window / 2);
}

Plane gaussian_blur(const Plane& p, double sigma) {
  if (sigma <= 0.0) return p;
  const std::vector<double> k = gaussian_kernel(sigma);
  return convolve_rows(convolve_rows(p, k).transpose(), k).transpose();
}

Image gaussian_blur(const Image& img, double sigma) {
  Image out;
  out.planes.reserve(img.planes.size());
  for (const Plane& p : img.planes) out.planes.push_back(gaussian_blur(p, sigma));
  return out;
}

Plane downsample_half(const Plane& p) {
  static const std::vector<double> kBinomial{1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  Plane smooth = convolve_rows(convolve_rows(p, kBinomial).transpose(), kBinomial).transpose();
  const int h = static_cast<int>(p.rows());
  const int w = static_cast<int>(p.cols());
  const int oh = (h + 1) / 2;
  const int ow = (w + 1) / 2;
  Plane out(oh, ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) out(y, x) = smooth(2 * y, 2 * x);
  }
  return out;
}

Plane gradient_magnitude(const Plane& p) {
  const int h = static_cast<int>(p.rows());
  const int w = static_cast<int>(p.cols());
  Plane out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (x + 1 < w) ? p(y, x + 1) - p(y, x) : 0.0;
      const double gy = (y + 1 < h) ? p(y + 1, x) - p(y, x) : 0.0;
      out(y, x) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return out;
}

Plane guided_filter(const Plane& guide, const Plane& src, int radius, double eps) {
  if (guide.rows() != src.rows() || guide.cols() != src.cols()) {
    throw ShapeError("guided filter guide/source shapes differ");
  }
  if (eps <= 0.0) throw ConfigError("guided filter eps must be positive");
  const Plane mean_i = box_mean(guide, radius);
  const Plane mean_p = box_mean(src, radius);
  const Plane corr_ii = box_mean(guide * guide, radius);
  const Plane corr_ip = box_mean(guide * src, radius);
  const Plane var_i = corr_ii - mean_i * mean_i;
  const Plane cov_ip = corr_ip - mean_i * mean_p;
  const Plane a = cov_ip / (var_i + eps);
  const Plane b = mean_p - a * mean_i;
  return box_mean(a, radius) * guide + box_mean(b, radius);
}

Image joint_bilateral(const Image& src, const Plane& guide, int radius, double sigma_s,
                      double sigma_r) {
  if (guide.rows() != src.height() || guide.cols() != src.width()) {
    throw ShapeError("joint bilateral guide/source shapes differ");
  }
  if (radius < 1 || sigma_s <= 0.0 || sigma_r <= 0.0) {
    throw ConfigError("joint bilateral needs radius >= 1 and positive sigmas");
  }
  const int h = src.height();
  const int w = src.width();
  const int nc = src.channels();
  Eigen::ArrayXXd spatial(2 * radius + 1, 2 * radius + 1);
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      spatial(dy + radius, dx + radius) =
          std::exp(-0.5 * (dy * dy + dx * dx) / (sigma_s * sigma_s));
    }
  }
  const double inv_2sr2 = 0.5 / (sigma_r * sigma_r);
  Image out(h, w, nc);
  std::vector<double> acc(static_cast<size_t>(nc));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::fill(acc.begin(), acc.end(), 0.0);
      double wsum = 0.0;
      const double g0 = guide(y, x);
      const int y0 = std::max(0, y - radius);
      const int y1 = std::min(h - 1, y + radius);
      const int x0 = std::max(0, x - radius);
      const int x1 = std::min(w - 1, x + radius);
      for (int yy = y0; yy <= y1; ++yy) {
        for (int xx = x0; xx <= x1; ++xx) {
          const double dg = guide(yy, xx) - g0;
          const double wgt =
              spatial(yy - y + radius, xx - x + radius) * std::exp(-dg * dg * inv_2sr2);
          wsum += wgt;
          for (int c = 0; c < nc; ++c) acc[static_cast<size_t>(c)] += wgt * src[c](yy, xx);
        }
      }
      for (int c = 0; c < nc; ++c) out[c](y, x) = acc[static_cast<size_t>(c)] / wsum;
    }
  }
  return out;
}

Plane upsample_bilinear(const Eigen::ArrayXXd& values, const std::vector<double>& anchor_y,
                        const std::vector<double>& anchor_x, int height, int width) {
  const int ny = static_cast<int>(anchor_y.size());
  const int nx = static_cast<int>(anchor_x.size());
  if (values.rows() != ny || values.cols() != nx || ny < 1 || nx < 1) {
    throw ShapeError("upsample grid does not match anchor coordinates");
  }
  // Per-axis lookup: segment index and interpolation weight, clamped at ends.
  auto axis = [](const std::vector<double>& anchors, int size) {
    std::vector<std::pair<int, double>> seg(static_cast<size_t>(size));
    const int n = static_cast<int>(anchors.size());
    for (int i = 0; i < size; ++i) {
      if (n == 1 || i <= anchors.front()) {
        seg[static_cast<size_t>(i)] = {0, 0.0};
      } else if (i >= anchors.back()) {
        seg[static_cast<size_t>(i)] = {n - 2, 1.0};
      } else {
        int k = 0;
        while (k + 2 < n && anchors[static_cast<size_t>(k + 1)] <= i) ++k;
        const double span = anchors[static_cast<size_t>(k + 1)] - anchors[static_cast<size_t>(k)];
        seg[static_cast<size_t>(i)] = {k, (i - anchors[static_cast<size_t>(k)]) / span};
      }
    }
    return seg;
  };
  const auto ys = axis(anchor_y, height);
  const auto xs = axis(anchor_x, width);
  Plane out(height, width);
  for (int y = 0; y < height; ++y) {
    const auto [i, wy] = ys[static_cast<size_t>(y)];
    const int i1 = (ny == 1) ? 0 : i + 1;
    for (int x = 0; x < width; ++x) {
      const auto [j, wx] = xs[static_cast<size_t>(x)];
      const int j1 = (nx == 1) ? 0 : j + 1;
      out(y, x) = (1 - wy) * ((1 - wx) * values(i, j) + wx * values(i, j1)) +
                  wy * ((1 - wx) * values(i1, j) + wx * values(i1, j1));
    }
  }
  return out;
}

}  // namespace unhaze
