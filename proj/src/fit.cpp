#include "hyk/fit.hpp"

#include <array>
#include <cmath>

#include "hyk/errors.hpp"

namespace hyk {

namespace {

// Returns (intercept, slope, r^2) of y = c + m x.
std::array<double, 3> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size()), sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  double mx = sx / n, my = sy / n, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InputError("fit needs distinct abscissae");
  double m = sxy / sxx;
  double r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return {my - m * mx, m, r2};
}

}  // namespace

ScalingFit loglog_fit(const std::vector<std::pair<double, double>>& pts, bool strict) {
  if (pts.size() < 2) throw InputError("scaling fit needs >= 2 points");
  std::vector<double> x, y;
  double lo = pts.front().first, hi = lo;
  for (auto [r, v] : pts) {
    if (!(r > 0.0) || !(v > 0.0)) throw InputError("scaling fit needs positive values");
    x.push_back(std::log(r));
    y.push_back(std::log(v));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  if (strict && (pts.size() < 4 || hi / lo < 10.0 * (1.0 - 1e-12)))
    throw InputError("scaling fit needs >= 4 points over >= 1 decade");
  auto [c, m, r2] = linear_fit(x, y);
  ScalingFit f;
  f.points = pts;
  f.slope = m;
  f.intercept = c;
  f.r_squared = r2;
  return f;
}

Extrapolation extrapolate(const std::vector<std::pair<double, double>>& values) {
  if (values.size() < 3) throw InputError("extrapolation needs >= 3 values");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i].first > 0.0)) throw InputError("box sizes must be positive");
    if (i > 0 && !(values[i].first > values[i - 1].first)) throw InputError("box sizes must increase");
    x.push_back(1.0 / values[i].first);
    y.push_back(values[i].second);
  }
  auto [c, m, r2] = linear_fit(x, y);
  (void)r2;
  Extrapolation e;
  e.value = c;
  double ss = 0.0;
  std::vector<double> res;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = y[i] - (c + m * x[i]);
    res.push_back(std::fabs(d));
    ss += d * d;
  }
  e.residual = std::sqrt(ss / static_cast<double>(x.size()));
  double scale = std::max(std::fabs(c), 1e-300);
  // Residuals of a 1/L law should shrink with L; flag anything else.
  for (std::size_t i = 1; i < res.size(); ++i)
    if (res[i] > res[i - 1] * (1.0 + 1e-9) && res[i] > 1e-12 * scale) e.low_confidence = true;
  return e;
}

}  // namespace hyk
