#include "hyk/potential.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hyk/errors.hpp"

namespace hyk {

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
double integrate_segments(F f, const std::vector<double>& nodes) {
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (nodes[i + 1] <= nodes[i]) continue;
    total += gauss_kronrod<double, 61>::integrate(f, nodes[i], nodes[i + 1], 15, 1e-13);
  }
  return total;
}

}  // namespace

RadialPotential RadialPotential::zero() { return square_well(0.0, 1.0); }

RadialPotential RadialPotential::square_well(double v0, double range) {
  if (!(v0 >= 0.0) || !(range > 0.0)) throw InputError("square_well needs v0 >= 0 and R > 0");
  RadialPotential p;
  p.kind_ = Kind::square_well;
  p.params_ = {v0, range};
  p.support_ = range;
  return p;
}

RadialPotential RadialPotential::truncated_gaussian(double v0, double width, double cutoff) {
  if (!(v0 >= 0.0) || !(width > 0.0) || !(cutoff > 0.0))
    throw InputError("truncated_gaussian needs v0 >= 0, width > 0, cutoff > 0");
  RadialPotential p;
  p.kind_ = Kind::truncated_gaussian;
  p.params_ = {v0, width, cutoff};
  p.support_ = cutoff;
  return p;
}

RadialPotential RadialPotential::tabulated(std::vector<double> r, std::vector<double> v) {
  if (r.size() != v.size() || r.size() < 2) throw InputError("table needs >= 2 matching nodes");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(v[i] >= 0.0)) throw InputError("tabulated potential must be nonnegative");
    if (i > 0 && !(r[i] > r[i - 1])) throw InputError("table radii must increase");
  }
  if (r.front() < 0.0) throw InputError("table radii must be >= 0");
  RadialPotential p;
  p.kind_ = Kind::tabulated;
  p.tab_r_ = std::move(r);
  p.tab_v_ = std::move(v);
  // Support: last node where the interpolant is nonzero on its left.
  double s = p.tab_r_.front();
  for (std::size_t i = 1; i < p.tab_r_.size(); ++i)
    if (p.tab_v_[i] > 0.0 || p.tab_v_[i - 1] > 0.0) s = p.tab_r_[i];
  p.support_ = std::max(s, 1e-300);
  return p;
}

RadialPotential RadialPotential::load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open potential table " + path);
  std::vector<double> r, v;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double a, b;
    if (ls >> a >> b) {
      r.push_back(a);
      v.push_back(b);
    }
  }
  return tabulated(std::move(r), std::move(v));
}

double RadialPotential::eval(double r) const {
  if (!(r >= 0.0)) throw InputError("eval needs r >= 0");
  if (r > support_) return 0.0;
  switch (kind_) {
    case Kind::square_well:
      return params_[0];
    case Kind::truncated_gaussian: {
      double x = r / params_[1];
      return params_[0] * std::exp(-x * x);
    }
    case Kind::tabulated: {
      if (r < tab_r_.front()) return tab_v_.front();
      auto it = std::upper_bound(tab_r_.begin(), tab_r_.end(), r);
      if (it == tab_r_.end()) return tab_v_.back();
      std::size_t j = static_cast<std::size_t>(it - tab_r_.begin());
      double t = (r - tab_r_[j - 1]) / (tab_r_[j] - tab_r_[j - 1]);
      return tab_v_[j - 1] + t * (tab_v_[j] - tab_v_[j - 1]);
    }
  }
  return 0.0;
}

std::vector<double> RadialPotential::breakpoints() const {
  std::vector<double> b{0.0};
  if (kind_ == Kind::tabulated)
    for (double x : tab_r_)
      if (x > 0.0 && x < support_) b.push_back(x);
  b.push_back(support_);
  return b;
}

RadialPotential RadialPotential::scaled(double alpha) const {
  if (!(alpha >= 0.0)) throw InputError("scale factor must be >= 0");
  RadialPotential p = *this;
  if (kind_ == Kind::tabulated) {
    for (double& x : p.tab_v_) x *= alpha;
  } else {
    p.params_[0] *= alpha;
  }
  return p;
}

std::string RadialPotential::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::square_well:
      os << "square_well(V0=" << params_[0] << ",R=" << params_[1] << ")";
      break;
    case Kind::truncated_gaussian:
      os << "truncated_gaussian(V0=" << params_[0] << ",w=" << params_[1] << ",Rc=" << params_[2]
         << ")";
      break;
    case Kind::tabulated:
      os << "tabulated(n=" << tab_r_.size() << ",R=" << support_ << ")";
      break;
  }
  return os.str();
}

double v_hat_zero(const RadialPotential& v) {
  if (v.kind() == RadialPotential::Kind::square_well) {
    double R = v.params()[1];
    return 4.0 * kPi * v.params()[0] * R * R * R / 3.0;
  }
  auto f = [&](double r) { return v.eval(r) * r * r; };
  return 4.0 * kPi * integrate_segments(f, v.breakpoints());
}

double v_hat(const RadialPotential& v, double p) {
  if (!(p >= 0.0)) throw InputError("v_hat needs p >= 0");
  if (p == 0.0) return v_hat_zero(v);
  if (v.kind() == RadialPotential::Kind::square_well) {
    double v0 = v.params()[0], R = v.params()[1];
    double pr = p * R;
    return 4.0 * kPi * v0 * (std::sin(pr) - pr * std::cos(pr)) / (p * p * p);
  }
  auto f = [&](double r) { return std::sin(p * r) * v.eval(r) * r; };
  return 4.0 * kPi / p * integrate_segments(f, v.breakpoints());
}

std::vector<RadialPotential> soft_sphere_ladder(double range, double h0, double factor, int count) {
  if (!(h0 > 0.0) || !(factor > 1.0) || count < 1) throw InputError("ladder needs h0 > 0, factor > 1");
  std::vector<RadialPotential> out;
  double h = h0;
  for (int i = 0; i < count; ++i, h *= factor) out.push_back(RadialPotential::square_well(h, range));
  return out;
}

}  // namespace hyk
