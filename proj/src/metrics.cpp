#include "metrics.hpp"

#include <cmath>

#include "errors.hpp"

namespace hrc {

EvalResult evaluate(const std::vector<CountPair>& pairs) {
  if (pairs.empty()) throw DataError("evaluate: empty pair list");
  double abs_sum = 0, sq_sum = 0, under = 0, over = 0, target_sum = 0;
  for (const CountPair& p : pairs) {
    const double d = p.actual - p.target;
    abs_sum += std::abs(d);
    sq_sum += d * d;
    if (d < 0) under += -d;
    if (d > 0) over += d;
    target_sum += p.target;
  }
  if (target_sum <= 0)
    throw DataError("evaluate: total target count must be > 0");
  EvalResult r;
  r.n = static_cast<int>(pairs.size());
  r.mae = abs_sum / r.n;
  r.rmse = std::sqrt(sq_sum / r.n);
  r.pct_under = under / target_sum * 100.0;
  r.pct_over = over / target_sum * 100.0;
  r.pct_diff = r.pct_under + r.pct_over;
  return r;
}

double cam_mass_ratio(const ActivationMap& cam, const DotAnnotation& ann,
                      double radius) {
  if (radius <= 0) throw DataError("cam_mass_ratio: radius must be > 0");
  if (cam.image_h != cam.h * cam.stride || cam.image_w != cam.w * cam.stride)
    throw DataError("cam_mass_ratio: map resolution metadata misaligned");
  const double r2 = radius * radius;
  double total = 0, near = 0;
  for (int y = 0; y < cam.h; ++y)
    for (int x = 0; x < cam.w; ++x) {
      const double v = cam.at(y, x);
      if (v <= 0) continue;
      total += v;
      const double cx = (x + 0.5) * cam.stride;
      const double cy = (y + 0.5) * cam.stride;
      for (const auto& [dx, dy] : ann.dots) {
        const double ddx = cx - dx, ddy = cy - dy;
        if (ddx * ddx + ddy * ddy <= r2) {
          near += v;
          break;
        }
      }
    }
  return total > 0 ? near / total : 0.0;
}

}  // namespace hrc
