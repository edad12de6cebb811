#pragma once

#include <string>
#include <vector>

namespace hyk {

// Units: hbar = 1, kinetic operator -Laplacian (m = 1/2).
class RadialPotential {
 public:
  enum class Kind { square_well, truncated_gaussian, tabulated };

  static RadialPotential zero();
  static RadialPotential square_well(double v0, double range);
  // v0 * exp(-r^2 / width^2) for r <= cutoff, zero beyond.
  static RadialPotential truncated_gaussian(double v0, double width, double cutoff);
  // Piecewise-linear through (r_i, V_i); zero past the last node.
  static RadialPotential tabulated(std::vector<double> r, std::vector<double> v);
  static RadialPotential load_table(const std::string& path);

  Kind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  double support_radius() const { return support_; }

  double eval(double r) const;
  // Nodes where V may fail to be smooth, sorted, inside [0, support].
  std::vector<double> breakpoints() const;
  // Returns a copy with V multiplied by alpha >= 0.
  RadialPotential scaled(double alpha) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::square_well;
  std::vector<double> params_;
  std::vector<double> tab_r_, tab_v_;
  double support_ = 0.0;
};

// V^(0) = 4 pi int_0^inf V(r) r^2 dr.
double v_hat_zero(const RadialPotential& v);

// Continuum transform 4 pi / p int_0^R sin(p r) V(r) r dr, p >= 0.
double v_hat(const RadialPotential& v, double p);

// Square wells V_n = h_n * 1_{r <= R} with heights growing geometrically,
// for users approximating a hard core of radius R.
std::vector<RadialPotential> soft_sphere_ladder(double range, double h0, double factor, int count);

}  // namespace hyk
