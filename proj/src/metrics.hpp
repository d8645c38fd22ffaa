#ifndef HRC_METRICS_HPP
#define HRC_METRICS_HPP

#include <vector>

#include "heatmap.hpp"

namespace hrc {

struct CountPair {
  double actual = 0;  // model output
  double target = 0;
};

struct EvalResult {
  double mae = 0, rmse = 0;
  double pct_under = 0, pct_over = 0, pct_diff = 0;
  int n = 0;
};

// MAE = sum |a-t| / N; RMSE = sqrt(sum (a-t)^2 / N);
// %U = 100 * sum |a-t| [a<t] / sum t; %O analogous with [a>t]; %D = %U + %O.
EvalResult evaluate(const std::vector<CountPair>& pairs);

// Fraction of positive CAM mass in cells whose full-resolution center lies
// within `radius` of some dot; 0 when there is no positive mass.
double cam_mass_ratio(const ActivationMap& cam, const DotAnnotation& ann,
                      double radius);

}  // namespace hrc

#endif
