#include "patchseg/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "patchseg/error.hpp"

namespace patchseg {

double heaviside_value(double phi, double eps) {
  return 0.5 * (1.0 + (2.0 / std::numbers::pi) * std::atan(phi / eps));
}

double dirac_value(double phi, double eps) { return (eps / std::numbers::pi) / (eps * eps + phi * phi); }

ImageGrid heaviside(const LevelSetState& state) {
  ImageGrid out(state.phi.width(), state.phi.height(), 0.0);
  auto o = out.values();
  const auto p = state.phi.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = heaviside_value(p[i], state.eps);
  return out;
}

ImageGrid dirac(const LevelSetState& state) {
  ImageGrid out(state.phi.width(), state.phi.height(), 0.0);
  auto o = out.values();
  const auto p = state.phi.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = dirac_value(p[i], state.eps);
  return out;
}

RegionMask inside_mask(const LevelSetState& state) {
  ImageGrid h(state.phi.width(), state.phi.height(), 0.0);
  auto hv = h.values();
  const auto p = state.phi.values();
  for (std::size_t i = 0; i < hv.size(); ++i) hv[i] = p[i] > 0.0 ? 1.0 : 0.0;
  return RegionMask(std::move(h));
}

LevelSetState init_from_mask(const RegionMask& mask, double eps, double nu) {
  const std::size_t n = mask.count();
  if (n == 0 || n == mask.grid().size())
    throw InvalidArgument("initial mask must contain both regions");
  ImageGrid phi(mask.width(), mask.height(), 0.0);
  auto p = phi.values();
  const auto h = mask.grid().values();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = h[i] != 0.0 ? 1.0 : -1.0;
  return reinitialize(LevelSetState{std::move(phi), eps, nu, 0.1});
}

ImageGrid curvature(const LevelSetState& state) {
  const ImageGrid& phi = state.phi;
  const std::size_t W = phi.width();
  const std::size_t H = phi.height();
  constexpr double kFloor = 1e-8;
  auto clampx = [W](long long x) { return static_cast<std::size_t>(std::clamp<long long>(x, 0, W - 1)); };
  auto clampy = [H](long long y) { return static_cast<std::size_t>(std::clamp<long long>(y, 0, H - 1)); };

  ImageGrid nx(W, H, 0.0);
  ImageGrid ny(W, H, 0.0);
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      const auto xi = static_cast<long long>(x);
      const auto yi = static_cast<long long>(y);
      const double gx = 0.5 * (phi(clampx(xi + 1), y) - phi(clampx(xi - 1), y));
      const double gy = 0.5 * (phi(x, clampy(yi + 1)) - phi(x, clampy(yi - 1)));
      const double mag = std::max(std::sqrt(gx * gx + gy * gy), kFloor);
      nx(x, y) = gx / mag;
      ny(x, y) = gy / mag;
    }
  }
  ImageGrid kappa(W, H, 0.0);
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      const auto xi = static_cast<long long>(x);
      const auto yi = static_cast<long long>(y);
      kappa(x, y) = 0.5 * (nx(clampx(xi + 1), y) - nx(clampx(xi - 1), y)) +
                    0.5 * (ny(x, clampy(yi + 1)) - ny(x, clampy(yi - 1)));
    }
  }
  return kappa;
}

double cfl_time_step(const LevelSetState& state, const ErrorField& e1, const ErrorField& e2) {
  if (!e1.same_shape(e2) || !e1.same_shape(state.phi))
    throw DimensionMismatch("error fields and phi differ in shape");
  const auto a = e1.values();
  const auto b = e2.values();
  const auto p = state.phi.values();
  double force = 0.0;
  double max_delta = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = dirac_value(p[i], state.eps);
    force = std::max(force, std::abs(a[i] - b[i]) * d);
    max_delta = std::max(max_delta, d);
  }
  return 0.45 / (force + 4.0 * state.nu * max_delta + 1e-12);
}

LevelSetState evolve_step(const LevelSetState& state, const ErrorField& e1, const ErrorField& e2) {
  if (!e1.same_shape(e2) || !e1.same_shape(state.phi))
    throw DimensionMismatch("error fields and phi differ in shape");
  LevelSetState next = state;
  const ImageGrid kappa = state.nu != 0.0 ? curvature(state) : ImageGrid(state.phi.width(), state.phi.height(), 0.0);
  auto p = next.phi.values();
  const auto a = e1.values();
  const auto b = e2.values();
  const auto k = kappa.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = dirac_value(p[i], state.eps);
    p[i] += state.dt * (-(a[i] - b[i]) * d + state.nu * d * k[i]);
  }
  return next;
}

namespace {

struct Segment {
  double ax, ay, bx, by;
};

double distance_to_segment(double px, double py, const Segment& s) {
  const double dx = s.bx - s.ax;
  const double dy = s.by - s.ay;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((px - s.ax) * dx + (py - s.ay) * dy) / len2, 0.0, 1.0);
  const double qx = s.ax + t * dx - px;
  const double qy = s.ay + t * dy - py;
  return std::sqrt(qx * qx + qy * qy);
}

// Zero crossing of phi as a polyline, one or two segments per grid cell.
std::vector<Segment> zero_crossing_segments(const ImageGrid& phi) {
  std::vector<Segment> segs;
  const std::size_t W = phi.width();
  const std::size_t H = phi.height();
  for (std::size_t y = 0; y + 1 < H; ++y) {
    for (std::size_t x = 0; x + 1 < W; ++x) {
      const double c00 = phi(x, y), c10 = phi(x + 1, y), c01 = phi(x, y + 1), c11 = phi(x + 1, y + 1);
      const bool i00 = c00 > 0, i10 = c10 > 0, i01 = c01 > 0, i11 = c11 > 0;
      const double fx = static_cast<double>(x);
      const double fy = static_cast<double>(y);
      auto cross = [](double a, double b) { return a / (a - b); };
      // Edge crossings: bottom (00-10), right (10-11), top (01-11), left (00-01).
      struct P {
        double x, y;
      };
      P bottom{}, right{}, top{}, left{};
      const bool hb = i00 != i10, hr = i10 != i11, ht = i01 != i11, hl = i00 != i01;
      if (hb) bottom = {fx + cross(c00, c10), fy};
      if (hr) right = {fx + 1.0, fy + cross(c10, c11)};
      if (ht) top = {fx + cross(c01, c11), fy + 1.0};
      if (hl) left = {fx, fy + cross(c00, c01)};
      const int count = hb + hr + ht + hl;
      if (count == 0) continue;
      if (count == 4) {
        const double center = 0.25 * (c00 + c10 + c01 + c11);
        if ((center > 0) == i00) {
          segs.push_back({bottom.x, bottom.y, right.x, right.y});
          segs.push_back({left.x, left.y, top.x, top.y});
        } else {
          segs.push_back({bottom.x, bottom.y, left.x, left.y});
          segs.push_back({right.x, right.y, top.x, top.y});
        }
        continue;
      }
      P ends[2];
      int e = 0;
      if (hb) ends[e++] = bottom;
      if (hr) ends[e++] = right;
      if (ht) ends[e++] = top;
      if (hl) ends[e++] = left;
      segs.push_back({ends[0].x, ends[0].y, ends[1].x, ends[1].y});
    }
  }
  return segs;
}

}  // namespace

LevelSetState reinitialize(const LevelSetState& state) {
  const ImageGrid& phi = state.phi;
  const std::size_t W = phi.width();
  const std::size_t H = phi.height();
  const std::vector<Segment> segs = zero_crossing_segments(phi);
  if (segs.empty()) return state;

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> nearest(W * H, kNone);
  std::vector<double> dist(W * H, std::numeric_limits<double>::infinity());
  auto offer = [&](std::size_t x, std::size_t y, std::size_t s) {
    const double d = distance_to_segment(static_cast<double>(x), static_cast<double>(y), segs[s]);
    const std::size_t i = y * W + x;
    if (d < dist[i]) {
      dist[i] = d;
      nearest[i] = s;
      return true;
    }
    return false;
  };

  // Seed the pixels at the corners of every crossing cell.
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const auto x0 = static_cast<std::size_t>(std::floor(std::min(segs[s].ax, segs[s].bx)));
    const auto y0 = static_cast<std::size_t>(std::floor(std::min(segs[s].ay, segs[s].by)));
    for (std::size_t y = y0; y <= std::min(y0 + 2, H - 1); ++y)
      for (std::size_t x = x0; x <= std::min(x0 + 2, W - 1); ++x) offer(x, y, s);
  }

  // Closest-segment propagation: each pixel tests its neighbours' segments.
  static constexpr int kDx[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
  static constexpr int kDy[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
  auto relax = [&](std::size_t x, std::size_t y) {
    bool changed = false;
    for (int n = 0; n < 8; ++n) {
      const long long nx = static_cast<long long>(x) + kDx[n];
      const long long ny = static_cast<long long>(y) + kDy[n];
      if (nx < 0 || ny < 0 || nx >= static_cast<long long>(W) || ny >= static_cast<long long>(H)) continue;
      const std::size_t s = nearest[static_cast<std::size_t>(ny) * W + static_cast<std::size_t>(nx)];
      if (s != kNone && s != nearest[y * W + x]) changed |= offer(x, y, s);
    }
    return changed;
  };
  for (int round = 0; round < 16; ++round) {
    bool changed = false;
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < W; ++x) changed |= relax(x, y);
    for (std::size_t y = H; y-- > 0;)
      for (std::size_t x = W; x-- > 0;) changed |= relax(x, y);
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = W; x-- > 0;) changed |= relax(x, y);
    for (std::size_t y = H; y-- > 0;)
      for (std::size_t x = 0; x < W; ++x) changed |= relax(x, y);
    if (!changed) break;
  }

  LevelSetState next = state;
  auto out = next.phi.values();
  const auto in = phi.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[i] > 0.0 ? dist[i] : -dist[i];
  return next;
}

ImageGrid gradient_norm_upwind(const ImageGrid& phi) {
  const std::size_t W = phi.width();
  const std::size_t H = phi.height();
  ImageGrid out(W, H, 0.0);
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      const double c = phi(x, y);
      const double dxm = x > 0 ? c - phi(x - 1, y) : 0.0;      // backward
      const double dxp = x + 1 < W ? phi(x + 1, y) - c : 0.0;  // forward
      const double dym = y > 0 ? c - phi(x, y - 1) : 0.0;
      const double dyp = y + 1 < H ? phi(x, y + 1) - c : 0.0;
      double gx2, gy2;
      if (c > 0.0) {
        gx2 = std::max(std::pow(std::max(dxm, 0.0), 2), std::pow(std::min(dxp, 0.0), 2));
        gy2 = std::max(std::pow(std::max(dym, 0.0), 2), std::pow(std::min(dyp, 0.0), 2));
      } else {
        gx2 = std::max(std::pow(std::min(dxm, 0.0), 2), std::pow(std::max(dxp, 0.0), 2));
        gy2 = std::max(std::pow(std::min(dym, 0.0), 2), std::pow(std::max(dyp, 0.0), 2));
      }
      out(x, y) = std::sqrt(gx2 + gy2);
    }
  }
  return out;
}

SdfQuality sdf_quality(const ImageGrid& phi) {
  const ImageGrid g = gradient_norm_upwind(phi);
  std::size_t far = 0, ok = 0;
  const auto p = phi.values();
  const auto gv = g.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::abs(p[i]) <= 2.0) continue;
    ++far;
    ok += std::abs(gv[i] - 1.0) <= 0.2;
  }
  return {far == 0 ? 1.0 : static_cast<double>(ok) / static_cast<double>(far), far};
}

double zero_set_displacement(const ImageGrid& before, const ImageGrid& after) {
  if (!before.same_shape(after)) throw DimensionMismatch("level sets differ in shape");
  double worst = 0.0;
  const auto visit = [&](std::size_t i, std::size_t j) {
    const double a = before.values()[i], b = before.values()[j];
    if ((a > 0.0) == (b > 0.0)) return;
    const double t = a / (a - b);
    const double at = after.values()[i] + t * (after.values()[j] - after.values()[i]);
    worst = std::max(worst, std::abs(at));
  };
  const std::size_t w = before.width(), h = before.height();
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      if (x + 1 < w) visit(y * w + x, y * w + x + 1);
      if (y + 1 < h) visit(y * w + x, (y + 1) * w + x);
    }
  return worst;
}

}  // namespace patchseg
