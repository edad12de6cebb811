#pragma once

#include <utility>
#include <vector>

namespace hyk {

struct ScalingFit {
  std::vector<std::pair<double, double>> points;  // (rho, value)
  double slope = 0.0;
  double intercept = 0.0;  // log(value) at rho = 1
  double r_squared = 0.0;
};

// Least-squares line through (log x, log y). Needs >= 2 positive points;
// strict mode also demands >= 4 points spanning a decade.
ScalingFit loglog_fit(const std::vector<std::pair<double, double>>& pts, bool strict = false);

struct Extrapolation {
  double value = 0.0;
  double residual = 0.0;  // rms misfit of c + b / L
  bool low_confidence = false;
};

// Fits value = c + b / L; needs >= 3 points at increasing L.
Extrapolation extrapolate(const std::vector<std::pair<double, double>>& values);

}  // namespace hyk
