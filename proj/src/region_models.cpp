#include "patchseg/region_models.hpp"

#include <algorithm>

#include "patchseg/error.hpp"
#include "patchseg/simd/kernels.hpp"

namespace patchseg {

namespace {
constexpr double kDivisionFloor = 1e-8;
}

double masked_sum(const ImageGrid& field, const RegionMask& mask) {
  if (!field.same_shape(mask.grid())) throw DimensionMismatch("field and mask differ in shape");
  double acc = 0.0;
  const auto f = field.values();
  const auto h = mask.grid().values();
  for (std::size_t i = 0; i < f.size(); ++i)
    if (h[i] != 0.0) acc += f[i];
  return acc;
}

PcFit pc_fit(const ImageGrid& img, const RegionMask& mask) {
  if (!img.same_shape(mask.grid())) throw DimensionMismatch("image and mask differ in shape");
  const std::size_t n = mask.count();
  if (n == 0) throw InvalidArgument("piecewise-constant fit needs a nonempty mask");
  const double c = masked_sum(img, mask) / static_cast<double>(n);
  ErrorField err(img.width(), img.height(), 0.0);
  auto e = err.values();
  const auto v = img.values();
  for (std::size_t i = 0; i < v.size(); ++i) e[i] = (v[i] - c) * (v[i] - c);
  return {c, std::move(err)};
}

PsFit ps_fit(const ImageGrid& img, const RegionMask& mask, double sigma, BoundaryPolicy bp) {
  if (!img.same_shape(mask.grid())) throw DimensionMismatch("image and mask differ in shape");
  const ImageGrid num = gaussian_blur(multiply(img, mask.grid()), sigma, bp);
  const ImageGrid den = gaussian_blur(mask.grid(), sigma, bp);
  ImageGrid g(img.width(), img.height(), 0.0);
  ErrorField err(img.width(), img.height(), 0.0);
  const auto nv = num.values();
  const auto dv = den.values();
  const auto iv = img.values();
  auto gv = g.values();
  auto ev = err.values();
  for (std::size_t i = 0; i < gv.size(); ++i) {
    gv[i] = nv[i] / std::max(dv[i], kDivisionFloor);
    ev[i] = (iv[i] - gv[i]) * (iv[i] - gv[i]);
  }
  return {std::move(g), std::move(err)};
}

ErrorField patch_error_map(const ImageGrid& img, const PatchBasis& basis, BoundaryPolicy bp) {
  const std::size_t m = basis.side();
  if (m > img.width() || m > img.height()) throw InvalidArgument("basis side exceeds image");
  ErrorField err = box_sum_sq(img, m, bp);
  const PaddedImage padded = pad_image(img, m / 2, bp);
  ImageGrid captured(img.width(), img.height(), 0.0);
  const auto& k = simd::kernels();
  for (const Patch& v : basis.bases()) {
    const ImageGrid resp = correlate_padded(padded, v);
    k.accumulate_squares(resp.values().data(), captured.values().data(), captured.size());
  }
  const double inv = 1.0 / static_cast<double>(m * m);
  auto e = err.values();
  const auto c = captured.values();
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = std::max(0.0, (e[i] - c[i]) * inv);
  return err;
}

ErrorField coupled_error(const ErrorField& smooth_err, const ErrorField& patch_err, double alpha) {
  if (!smooth_err.same_shape(patch_err)) throw DimensionMismatch("error fields differ in shape");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  ErrorField out(smooth_err.width(), smooth_err.height(), 0.0);
  auto o = out.values();
  const auto s = smooth_err.values();
  const auto p = patch_err.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = alpha * s[i] + (1.0 - alpha) * p[i];
  return out;
}

ErrorField coupled_error(const ImageGrid& img, const RegionModel& model, BoundaryPolicy bp) {
  if (!img.same_shape(model.g)) throw DimensionMismatch("model reconstruction differs in shape");
  ErrorField smooth(img.width(), img.height(), 0.0);
  auto s = smooth.values();
  const auto iv = img.values();
  const auto gv = model.g.values();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = (iv[i] - gv[i]) * (iv[i] - gv[i]);
  if (model.alpha == 1.0) return smooth;
  if (!model.basis) throw InvalidArgument("model has no patch basis but alpha < 1");
  return coupled_error(smooth, patch_error_map(img, *model.basis, bp), model.alpha);
}

RegionMask assign_labels(const ErrorField& err1, const ErrorField& err2) {
  if (!err1.same_shape(err2)) throw DimensionMismatch("error fields differ in shape");
  ImageGrid h(err1.width(), err1.height(), 0.0);
  auto hv = h.values();
  const auto a = err1.values();
  const auto b = err2.values();
  for (std::size_t i = 0; i < hv.size(); ++i) hv[i] = a[i] <= b[i] ? 1.0 : 0.0;
  return RegionMask(std::move(h));
}

}  // namespace patchseg
