#include "patchseg/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "patchseg/error.hpp"
#include "patchseg/simd/kernels.hpp"

namespace patchseg {

ImageGrid::ImageGrid(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), values_(width * height, fill) {
  if (width == 0 || height == 0) throw InvalidArgument("image dimensions must be at least 1x1");
  if (!std::isfinite(fill)) throw InvalidArgument("image fill value must be finite");
}

ImageGrid::ImageGrid(std::size_t width, std::size_t height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width == 0 || height == 0) throw InvalidArgument("image dimensions must be at least 1x1");
  if (values_.size() != width * height)
    throw DimensionMismatch("image value count does not match width x height");
  if (!all_finite()) throw InvalidArgument("image values must be finite");
}

double ImageGrid::at(std::size_t x, std::size_t y) const {
  if (x >= width_ || y >= height_) throw InvalidArgument("pixel outside image");
  return (*this)(x, y);
}

bool ImageGrid::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

Patch::Patch(std::size_t side) : side_(side), values_(side * side, 0.0) {
  if (side % 2 == 0) throw InvalidArgument("patch side must be odd, got " + std::to_string(side));
}

Patch::Patch(std::size_t side, std::vector<double> values) : side_(side), values_(std::move(values)) {
  if (side % 2 == 0) throw InvalidArgument("patch side must be odd, got " + std::to_string(side));
  if (values_.size() != side * side) throw DimensionMismatch("patch value count does not match side^2");
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidArgument("patch values must be finite");
}

double Patch::operator()(int u, int v) const {
  const int r = static_cast<int>(radius());
  return values_[static_cast<std::size_t>((v + r) * static_cast<int>(side_) + (u + r))];
}

double& Patch::operator()(int u, int v) {
  const int r = static_cast<int>(radius());
  return values_[static_cast<std::size_t>((v + r) * static_cast<int>(side_) + (u + r))];
}

std::size_t boundary_index(long long i, std::size_t n, BoundaryPolicy bp) {
  const auto nn = static_cast<long long>(n);
  if (i >= 0 && i < nn) return static_cast<std::size_t>(i);
  if (bp == BoundaryPolicy::replicate) return i < 0 ? 0 : n - 1;
  // Symmetric extension has period 2n.
  const long long period = 2 * nn;
  long long j = i % period;
  if (j < 0) j += period;
  if (j >= nn) j = period - 1 - j;
  return static_cast<std::size_t>(j);
}

PaddedImage pad_image(const ImageGrid& img, std::size_t pad, BoundaryPolicy bp) {
  PaddedImage out{img.width(), img.height(), pad, {}};
  const std::size_t pw = img.width() + 2 * pad;
  const std::size_t ph = img.height() + 2 * pad;
  out.data.resize(pw * ph);
  std::vector<std::size_t> xmap(pw);
  for (std::size_t px = 0; px < pw; ++px)
    xmap[px] = boundary_index(static_cast<long long>(px) - static_cast<long long>(pad), img.width(), bp);
  for (std::size_t py = 0; py < ph; ++py) {
    const std::size_t sy =
        boundary_index(static_cast<long long>(py) - static_cast<long long>(pad), img.height(), bp);
    const auto src = img.row(sy);
    double* dst = out.data.data() + py * pw;
    for (std::size_t px = 0; px < pw; ++px) dst[px] = src[xmap[px]];
  }
  return out;
}

Patch extract_patch(const ImageGrid& img, std::size_t x, std::size_t y, std::size_t m,
                    BoundaryPolicy bp) {
  if (m % 2 == 0) throw InvalidArgument("patch side must be odd");
  if (x >= img.width() || y >= img.height()) throw InvalidArgument("patch center outside image");
  Patch p(m);
  const int r = static_cast<int>(m / 2);
  for (int v = -r; v <= r; ++v) {
    const std::size_t sy = boundary_index(static_cast<long long>(y) + v, img.height(), bp);
    for (int u = -r; u <= r; ++u) {
      const std::size_t sx = boundary_index(static_cast<long long>(x) + u, img.width(), bp);
      p(u, v) = img(sx, sy);
    }
  }
  return p;
}

double patch_dot(const Patch& a, const Patch& b) {
  if (a.side() != b.side()) throw DimensionMismatch("patch sides differ");
  return simd::kernels().dot(a.values().data(), b.values().data(), a.size());
}

double patch_norm(const Patch& a) { return std::sqrt(patch_dot(a, a)); }

ImageGrid correlate_padded(const PaddedImage& padded, const Patch& kernel) {
  const std::size_t r = kernel.radius();
  if (padded.pad < r) throw InvalidArgument("image padding smaller than kernel radius");
  const auto& k = simd::kernels();
  ImageGrid out(padded.width, padded.height, 0.0);
  const auto m = kernel.side();
  const auto rr = static_cast<long long>(r);
  for (std::size_t y = 0; y < padded.height; ++y) {
    double* dst = out.row(y).data();
    for (std::size_t kv = 0; kv < m; ++kv) {
      const double* src = padded.at(-rr, static_cast<long long>(y) + static_cast<long long>(kv) - rr);
      k.correlate_row(src, kernel.values().data() + kv * m, m, dst, padded.width);
    }
  }
  return out;
}

ImageGrid correlate(const ImageGrid& img, const Patch& kernel, BoundaryPolicy bp) {
  if (kernel.side() > img.width() || kernel.side() > img.height())
    throw InvalidArgument("kernel larger than image");
  return correlate_padded(pad_image(img, kernel.radius(), bp), kernel);
}

ImageGrid box_sum_sq(const ImageGrid& img, std::size_t m, BoundaryPolicy bp) {
  if (m % 2 == 0) throw InvalidArgument("window side must be odd");
  if (m > img.width() || m > img.height()) throw InvalidArgument("window larger than image");
  const PaddedImage p = pad_image(img, m / 2, bp);
  const std::size_t pw = p.stride();
  const std::size_t ph = img.height() + 2 * p.pad;
  // integral[(y)(pw+1) + x] = sum of squares over rows < y, cols < x
  std::vector<double> integral((pw + 1) * (ph + 1), 0.0);
  for (std::size_t y = 0; y < ph; ++y) {
    double run = 0.0;
    const double* src = p.data.data() + y * pw;
    double* above = integral.data() + y * (pw + 1);
    double* cur = integral.data() + (y + 1) * (pw + 1);
    for (std::size_t x = 0; x < pw; ++x) {
      run += src[x] * src[x];
      cur[x + 1] = above[x + 1] + run;
    }
  }
  ImageGrid out(img.width(), img.height(), 0.0);
  for (std::size_t y = 0; y < img.height(); ++y) {
    const double* top = integral.data() + y * (pw + 1);
    const double* bot = integral.data() + (y + m) * (pw + 1);
    for (std::size_t x = 0; x < img.width(); ++x)
      out(x, y) = bot[x + m] - bot[x] - top[x + m] + top[x];
  }
  return out;
}

ImageGrid gaussian_blur(const ImageGrid& img, double sigma, BoundaryPolicy bp) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian sigma must be positive");
  const auto radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
  const std::size_t taps = 2 * radius + 1;
  std::vector<double> w(taps);
  double total = 0.0;
  for (std::size_t t = 0; t < taps; ++t) {
    const double d = static_cast<double>(t) - static_cast<double>(radius);
    w[t] = std::exp(-0.5 * d * d / (sigma * sigma));
    total += w[t];
  }
  for (double& x : w) x /= total;

  const auto& k = simd::kernels();
  const std::size_t W = img.width();
  const std::size_t H = img.height();
  const auto rr = static_cast<long long>(radius);

  ImageGrid horiz(W, H, 0.0);
  std::vector<double> line(std::max(W, H) + 2 * radius);
  for (std::size_t y = 0; y < H; ++y) {
    const auto src = img.row(y);
    for (std::size_t i = 0; i < W + 2 * radius; ++i)
      line[i] = src[boundary_index(static_cast<long long>(i) - rr, W, bp)];
    k.correlate_row(line.data(), w.data(), taps, horiz.row(y).data(), W);
  }
  ImageGrid out(W, H, 0.0);
  std::vector<double> col(H);
  for (std::size_t x = 0; x < W; ++x) {
    for (std::size_t i = 0; i < H + 2 * radius; ++i)
      line[i] = horiz(x, boundary_index(static_cast<long long>(i) - rr, H, bp));
    std::fill(col.begin(), col.end(), 0.0);
    k.correlate_row(line.data(), w.data(), taps, col.data(), H);
    for (std::size_t y = 0; y < H; ++y) out(x, y) = col[y];
  }
  return out;
}

ImageGrid multiply(const ImageGrid& a, const ImageGrid& b) {
  if (!a.same_shape(b)) throw DimensionMismatch("image shapes differ");
  ImageGrid out(a.width(), a.height(), 0.0);
  auto o = out.values();
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] * bv[i];
  return out;
}

}  // namespace patchseg
