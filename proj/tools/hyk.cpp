// hyk command-line front end.
#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include "hyk/errors.hpp"
#include "hyk/fit.hpp"
#include "hyk/fockcheck.hpp"
#include "hyk/hyformula.hpp"
#include "hyk/kernels.hpp"
#include "hyk/lattice.hpp"
#include "hyk/parallel.hpp"
#include "hyk/paulisum.hpp"
#include "hyk/potential.hpp"
#include "hyk/scattering.hpp"

using json = nlohmann::ordered_json;
using namespace hyk;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Param {
  std::string name;
  json def;
  std::string help;
};

struct Outcome {
  json record = json::object();
  std::vector<std::string> header;
  std::vector<std::vector<json>> rows;
  json residuals = json::object();
  bool ok = true;
  std::string plot;  // python snippet reading the CSV, if any
};

struct Command {
  std::string name, help, emit;
  std::vector<Param> params;
  std::function<void(json&)> validate;
  std::function<Outcome(const json&)> run;
};

// ---- small helpers ----

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception&) {
      throw InputError("not a number: '" + tok + "'");
    }
    if (tok.find_first_not_of(" \t", pos) != std::string::npos) throw InputError("not a number: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw InputError(msg);
}

void check_gamma(const json& c) {
  double g = c["gamma"].get<double>();
  require(g > 0.0 && g < 1.0 / 6.0, "gamma must lie in (0, 1/6)");
}

RadialPotential make_potential(const json& c) {
  const std::string kind = c["potential"].get<std::string>();
  if (kind == "table") return RadialPotential::load_table(c["table"].get<std::string>());
  if (kind == "zero") return RadialPotential::zero();
  auto p = parse_list(c["params"].get<std::string>());
  if (kind == "square") {
    require(p.size() == 2, "square needs params v0,range");
    return RadialPotential::square_well(p[0], p[1]);
  }
  if (kind == "gaussian") {
    require(p.size() == 3, "gaussian needs params v0,width,cutoff");
    return RadialPotential::truncated_gaussian(p[0], p[1], p[2]);
  }
  throw InputError("unknown potential '" + kind + "' (square, gaussian, table, zero)");
}

GridSpec make_grid(const json& c) {
  GridSpec g;
  g.nodes = c["nodes"].get<int>();
  g.r_max = c["rmax"].get<double>();
  g.exterior_nodes = c["exterior-nodes"].get<int>();
  g.rtol = c["rtol"].get<double>();
  return g;
}

const std::vector<Param> kPotentialParams{
    {"potential", "square", "square | gaussian | table | zero"},
    {"params", "2,1", "comma list: square v0,R; gaussian v0,width,cutoff"},
    {"table", "", "two-column r V file for --potential table"},
    {"rmax", 0.0, "outer grid radius, 0 = twice the support"},
    {"nodes", 400, "interior grid intervals"},
    {"exterior-nodes", 64, "exterior grid intervals"},
    {"rtol", 1e-10, "ODE relative tolerance"},
};

std::vector<Param> with_potential(std::vector<Param> p, const json& overrides = json::object()) {
  for (Param q : kPotentialParams) {
    if (overrides.contains(q.name)) q.def = overrides[q.name];
    p.push_back(q);
  }
  return p;
}

void validate_potential(json& c) {
  (void)make_potential(c);
  require(c["nodes"].get<int>() >= 8, "nodes must be >= 8");
  require(c["rtol"].get<double>() > 0.0, "rtol must be positive");
}

SpinDensities densities(const json& c) {
  double up = c["rho-up"].get<double>(), down = c["rho-down"].get<double>();
  require(up > 0.0 && down > 0.0, "densities must be positive");
  return {up, down};
}

// ---- subcommands ----

Outcome run_scatter(const json& c) {
  auto sol = solve_zero_energy(make_potential(c), make_grid(c));
  Outcome o;
  o.header = {"r", "phi", "u"};
  for (std::size_t i = 0; i < sol.r.size(); ++i) o.rows.push_back({sol.r[i], sol.phi[i], sol.u[i]});
  double eight_pi_a = 8.0 * std::numbers::pi * sol.a;
  double vf = sol.int_v_f();
  double rv = eight_pi_a != 0.0 ? std::fabs(vf - eight_pi_a) / eight_pi_a : std::fabs(vf);
  double re = energy_identity_residual(sol);
  o.record = {{"potential", sol.potential.describe()}, {"a", sol.a}, {"support", sol.support},
              {"int_v_f", vf}, {"int_v_one_minus_phi_sq", sol.int_v_one_minus_phi_sq()},
              {"int_grad_phi_sq", sol.int_grad_phi_sq()}};
  o.residuals = {{"v_f_identity", rv}, {"energy_identity", re}};
  o.ok = rv <= c["tol-vf"].get<double>() && re <= c["tol-energy"].get<double>();
  return o;
}

Outcome run_hy(const json& c) {
  SpinDensities d = c["symmetric"].get<bool>() || c["rho-up"].get<double>() < 0.0
                        ? SpinDensities::symmetric(c["rho"].get<double>())
                        : densities(c);
  double a = c["a"].get<double>();
  if (a < 0.0) a = solve_zero_energy(make_potential(c), make_grid(c)).a;
  auto e = huang_yang_energy(d, a);
  Outcome o;
  o.record = {{"rho_up", d.rho_up}, {"rho_down", d.rho_down}, {"a", a},
              {"kinetic", e.kinetic}, {"second_order", e.second_order}, {"third_order", e.third_order},
              {"total", e.total}};
  o.header = {"term", "value"};
  for (const char* k : {"kinetic", "second_order", "third_order", "total"}) o.rows.push_back({k, o.record[k]});
  return o;
}

void validate_hy(json& c) {
  if (c["symmetric"].get<bool>() || c["rho-up"].get<double>() < 0.0)
    require(c["rho"].get<double>() > 0.0, "rho must be positive");
  else
    (void)densities(c);
  if (c["a"].get<double>() < 0.0) validate_potential(c);
}

Outcome run_fcurve(const json& c) {
  double x0 = c["xmin"].get<double>(), x1 = c["xmax"].get<double>();
  int n = c["n"].get<int>();
  Outcome o;
  o.header = {"x", "F"};
  for (int i = 0; i < n; ++i) {
    double x = n == 1 ? x0 : x0 + (x1 - x0) * i / (n - 1);
    o.rows.push_back({x, F(x)});
  }
  o.record = {{"points", n}, {"F_at_one", F(1.0)}, {"F_at_one_closed_form", F_at_one_closed_form()}};
  o.plot = "plt.plot(d['x'], d['F']); plt.xlabel('x'); plt.ylabel('F(x)')";
  return o;
}

Outcome run_pauli(const json& c) {
  double ku = c["kup"].get<double>(), kd = c["kdown"].get<double>(), eps = c["eps"].get<double>();
  Outcome o;
  if (c["method"].get<std::string>() == "profile") {
    double v = pauli_blocked_integral_profile(ku, kd, eps);
    o.record = {{"method", "profile"}, {"value", v}};
  } else {
    MCParams mc;
    mc.samples = c["samples"].get<std::uint64_t>();
    mc.seed = c["seed"].get<std::uint64_t>();
    mc.strata = c["strata"].get<int>();
    auto r = pauli_blocked_integral(ku, kd, eps, mc);
    o.record = {{"method", "mc"}, {"value", r.value}, {"std_error", r.std_error}, {"n_samples", r.n_samples},
                {"seed", r.seed}};
    o.header = {"i_up", "i_down", "mean", "std_error", "n"};
    json strata = json::array();
    for (const auto& s : r.breakdown) {
      o.rows.push_back({s.i_up, s.i_down, s.mean, s.std_error, s.n});
      strata.push_back({{"i_up", s.i_up}, {"i_down", s.i_down}, {"mean", s.mean}, {"std_error", s.std_error},
                        {"n", s.n}});
    }
    o.record["strata"] = strata;
  }
  if (c["oracle"].get<bool>()) {
    double ref = pauli_closed_form(ku, kd);
    double v = o.record["value"].get<double>();
    double se = o.record.contains("std_error") ? o.record["std_error"].get<double>() : 0.0;
    o.record["oracle"] = ref;
    o.residuals = {{"relative", std::fabs(v - ref) / ref}, {"sigmas", se > 0 ? std::fabs(v - ref) / se : 0.0}};
    o.ok = std::fabs(v - ref) <= std::max(3.0 * se, 1e-6 * std::fabs(ref)) && std::fabs(v - ref) <= 0.01 * ref;
  }
  return o;
}

void validate_pauli(json& c) {
  require(c["kup"].get<double>() > 0.0 && c["kdown"].get<double>() > 0.0, "kup and kdown must be positive");
  require(c["eps"].get<double>() >= 0.0, "eps must be >= 0");
  require(c["samples"].get<std::uint64_t>() >= 1, "samples must be >= 1");
  require(c["strata"].get<int>() >= 1, "strata must be >= 1");
  auto m = c["method"].get<std::string>();
  require(m == "mc" || m == "profile", "method must be mc or profile");
  if (c["oracle"].get<bool>()) require(c["eps"].get<double>() == 0.0, "the closed-form oracle needs eps = 0");
}

Outcome run_lattice(const json& c) {
  SpinDensities d = densities(c);
  auto pot = make_potential(c);
  auto sol = solve_zero_energy(pot, make_grid(c));
  double pc = c["cutoff"].get<double>(), eps = c["eps"].get<double>(), gamma = c["gamma"].get<double>();
  double v0 = v_hat_zero(pot);
  double kin_cont = 0.6 * std::pow(6.0 * std::numbers::pi * std::numbers::pi, 2.0 / 3.0) *
                    (std::pow(d.rho_up, 5.0 / 3.0) + std::pow(d.rho_down, 5.0 / 3.0));
  Outcome o;
  o.header = {"L", "N_up", "N_down", "kinetic_per_volume", "leading_per_volume", "correction_per_volume",
              "correction_continuum", "relative_gap", "truncation_bound", "warning"};
  std::vector<std::pair<double, double>> kin;
  double worst_gap = 0.0;
  for (double L : parse_list(c["boxsize"].get<std::string>())) {
    auto lat = build_lattice(L, d, pc);
    auto f = ffg_energy(lat, v0);
    kin.emplace_back(L, f.kinetic_per_volume);
    auto per = periodize(sol, L, gamma, pc, d.total());
    auto cs = correction_lattice_sum(lat, per, eps, c["truncation-tol"].get<double>());
    double cont = correction_continuum(sol, lat.k_f_effective(0), lat.k_f_effective(1), eps, pc);
    double gap = cont != 0.0 ? (cs.per_volume - cont) / cont : 0.0;
    worst_gap = std::max(worst_gap, std::fabs(gap));
    o.rows.push_back({L, lat.N[0], lat.N[1], f.kinetic_per_volume, f.leading_per_volume, cs.per_volume, cont, gap,
                      cs.truncation_bound, cs.warning});
  }
  o.record = {{"kinetic_continuum", kin_cont}, {"a", sol.a}, {"v_hat_zero", v0}};
  o.residuals["max_relative_correction_gap"] = worst_gap;
  if (kin.size() >= 3) {
    auto ex = extrapolate(kin);
    o.record["kinetic_extrapolated"] = ex.value;
    o.record["kinetic_extrapolation_residual"] = ex.residual;
    o.record["low_confidence"] = ex.low_confidence;
    o.residuals["kinetic_relative"] = std::fabs(ex.value - kin_cont) / kin_cont;
  }
  return o;
}

void validate_lattice(json& c) {
  (void)densities(c);
  check_gamma(c);
  auto Ls = parse_list(c["boxsize"].get<std::string>());
  require(!Ls.empty(), "boxsize needs at least one value");
  for (double L : Ls) require(L > 0.0, "box sizes must be positive");
  require(c["cutoff"].get<double>() > 0.0, "cutoff must be positive");
  require(c["eps"].get<double>() > 0.0, "eps must be positive on the lattice");
  validate_potential(c);
}

Outcome run_tscaling(const json& c) {
  auto d = SpinDensities::symmetric(c["rho"].get<double>());
  TIntegralOptions opt;
  opt.points = c["points"].get<int>();
  opt.decades = c["decades"].get<double>();
  opt.kappa = c["kappa"].get<double>();
  double L = c["kfl"].get<double>() / d.kf_up();
  auto suite = t_integral_suite(d, c["gamma"].get<double>(), c["delta"].get<double>(), L, opt);
  double tol = c["tol"].get<double>();
  Outcome o;
  o.header = {"name", "rho", "value"};
  json fits = json::array();
  for (const auto& t : suite) {
    for (const auto& [r, v] : t.fit.points) o.rows.push_back({t.name, r, v});
    bool pass = std::fabs(t.fit.slope - t.target) <= tol;
    o.ok = o.ok && pass;
    fits.push_back({{"name", t.name}, {"slope", t.fit.slope}, {"target", t.target}, {"r_squared", t.fit.r_squared},
                    {"pass", pass}});
    o.residuals[t.name] = t.fit.slope - t.target;
  }
  o.record = {{"box", L}, {"fits", fits}};
  o.plot =
      "for n, g in d.groupby('name'): plt.loglog(g['rho'], g['value'].abs(), 'o-', label=n)\n"
      "plt.legend(); plt.xlabel('rho')";
  return o;
}

void validate_tscaling(json& c) {
  require(c["rho"].get<double>() > 0.0, "rho must be positive");
  check_gamma(c);
  require(c["delta"].get<double>() > 0.0, "delta must be positive");
  require(c["points"].get<int>() >= 2, "points must be >= 2");
  require(c["decades"].get<double>() > 0.0, "decades must be positive");
  require(c["kfl"].get<double>() > 0.0, "kfl must be positive");
}

Outcome run_heatkernel(const json& c) {
  double rho = c["rho"].get<double>(), gamma = c["gamma"].get<double>();
  double K3 = 3.0 * std::pow(rho, 1.0 / 3.0 - gamma);
  double L = c["box"].get<double>(), tlo = c["tlo"].get<double>(), thi = c["thi"].get<double>();
  if (L <= 0.0) L = 20.0 * 2.0 * std::numbers::pi / K3;
  if (tlo <= 0.0) tlo = 0.01 / (K3 * K3);
  if (thi <= 0.0) thi = 0.1 / (K3 * K3);
  int n = c["points"].get<int>();
  auto fit = heat_kernel_scaling(L, rho, gamma, tlo, thi, n);
  Outcome o;
  o.header = {"t", "l1", "min_value", "l2_one", "l2_gt", "rescaled"};
  double l1err = 0.0;
  for (const auto& [t, v] : fit.points) {
    auto h = heat_kernel_norms(t, L, rho, gamma);
    l1err = std::max(l1err, std::fabs(h.l1 - h.l1_exact));
    o.rows.push_back({t, h.l1, h.min_value, h.l2_one, h.l2_gt, h.rescaled});
    (void)v;
  }
  o.record = {{"box", L}, {"t_lo", tlo}, {"t_hi", thi}, {"slope", fit.slope}, {"r_squared", fit.r_squared}};
  o.residuals = {{"l1", l1err}, {"slope", fit.slope}};
  o.ok = l1err <= c["tol-l1"].get<double>() && fit.slope <= c["slope-max"].get<double>();
  o.plot = "plt.loglog(d['t'], d['rescaled'], 'o-'); plt.xlabel('t')";
  return o;
}

void validate_heatkernel(json& c) {
  require(c["rho"].get<double>() > 0.0, "rho must be positive");
  check_gamma(c);
  require(c["points"].get<int>() >= 2, "points must be >= 2");
  double lo = c["tlo"].get<double>(), hi = c["thi"].get<double>();
  if (lo > 0.0 && hi > 0.0) require(hi > lo, "thi must exceed tlo");
}

// "up:0,0,0;1,0,0|down:0,0,0;-1,0,0"
std::vector<std::pair<int, IVec3>> parse_modes(const std::string& s) {
  std::vector<std::pair<int, IVec3>> out;
  std::stringstream ss(s);
  std::string block;
  while (std::getline(ss, block, '|')) {
    auto colon = block.find(':');
    require(colon != std::string::npos, "mode block needs 'up:' or 'down:'");
    std::string spin = block.substr(0, colon);
    int sp = spin == "up" ? 0 : spin == "down" ? 1 : -1;
    require(sp >= 0, "spin must be up or down");
    std::stringstream ks(block.substr(colon + 1));
    std::string k;
    while (std::getline(ks, k, ';')) {
      auto v = parse_list(k);
      require(v.size() == 3, "each momentum needs three integers");
      IVec3 m{};
      for (int i = 0; i < 3; ++i) {
        require(v[static_cast<std::size_t>(i)] == std::round(v[static_cast<std::size_t>(i)]), "momenta are integers");
        m[static_cast<std::size_t>(i)] = static_cast<int>(v[static_cast<std::size_t>(i)]);
      }
      out.emplace_back(sp, m);
    }
  }
  return out;
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string w;
  while (std::getline(ss, w, ','))
    if (!w.empty()) out.push_back(w);
  return out;
}

FockPreset make_preset(const json& c) {
  FockPreset p = fock_preset(c["preset"].get<std::string>());
  if (!c["modes"].get<std::string>().empty()) {
    p.name = "custom";
    p.modes = parse_modes(c["modes"].get<std::string>());
  }
  for (auto [key, field] : {std::pair{"box", &p.L}, {"kf", &p.kf}, {"v0", &p.v0}, {"range", &p.range}, {"eps", &p.eps}})
    if (c[key].get<double>() > 0.0) *field = c[key].get<double>();
  return p;
}

Outcome run_fock(const json& c) {
  auto p = make_preset(c);
  auto res = run_fock_checks(p, split_words(c["checks"].get<std::string>()), c["seed"].get<std::uint64_t>(),
                             c["kernel"].get<std::string>());
  Outcome o;
  o.header = {"check", "value", "tolerance", "pass", "detail"};
  for (const auto& r : res) {
    o.rows.push_back({r.name, r.value, r.tolerance, r.pass, r.detail});
    o.residuals[r.name] = r.value;
    o.ok = o.ok && r.pass;
  }
  o.record = {{"preset", p.name}, {"modes", p.modes.size()}, {"all_pass", o.ok}};
  return o;
}

void validate_fock(json& c) {
  auto p = make_preset(c);
  require(p.modes.size() <= FockSpace::kMaxModes, "at most 16 modes");
  auto k = c["kernel"].get<std::string>();
  require(k == "v" || k == "vphi" || k == "vf", "kernel must be v, vphi or vf");
}

std::map<std::string, Command>& registry();

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object())
      flatten(*it, key, out);
    else if (!it->is_array())
      out.emplace_back(key, *it);
  }
}

json coerce(const json& def, const json& v, const std::string& name);
json resolve_config(const Command& cmd, const json& file, const std::map<std::string, std::string>& flags);

std::vector<json> sweep_configs(const json& c) {
  auto& reg = registry();
  std::string target = c["command"].get<std::string>();
  require(reg.count(target) && target != "sweep", "sweep target must be another subcommand");
  const Command& cmd = reg.at(target);
  json base = json::parse(c["base"].get<std::string>());
  require(base.is_object(), "base must be a JSON object");
  std::string pname = c["param"].get<std::string>();
  auto it = std::find_if(cmd.params.begin(), cmd.params.end(), [&](const Param& p) { return p.name == pname; });
  require(it != cmd.params.end(), "unknown sweep parameter '" + pname + "'");
  std::vector<json> out;
  std::stringstream ss(c["values"].get<std::string>());
  std::string v;
  while (std::getline(ss, v, ',')) {
    json over = base;
    over[pname] = v;
    json sub = resolve_config(cmd, json::object(), {});
    for (auto& [k, val] : over.items()) {
      require(sub.contains(k), "unknown parameter '" + k + "' for " + target);
      sub[k] = val.is_string() && !sub[k].is_string() ? coerce(sub[k], val, k) : val;
    }
    out.push_back(sub);
  }
  require(!out.empty(), "sweep needs values");
  return out;
}

void finalize_seed(const std::string& name, json& c);

Outcome run_sweep(const json& c) {
  const Command& cmd = registry().at(c["command"].get<std::string>());
  Outcome o;
  std::string pname = c["param"].get<std::string>();
  std::vector<std::string> cols;
  for (json sub : sweep_configs(c)) {
    finalize_seed(cmd.name, sub);
    cmd.validate(sub);
    Outcome r = cmd.run(sub);
    o.ok = o.ok && r.ok;
    std::vector<std::pair<std::string, json>> flat;
    flatten(r.record, "", flat);
    flatten(json{{"residual", r.residuals}}, "", flat);
    if (cols.empty())
      for (auto& [k, v] : flat) cols.push_back(k);
    std::vector<json> row{sub[pname]};
    for (const auto& col : cols) {
      auto f = std::find_if(flat.begin(), flat.end(), [&](auto& kv) { return kv.first == col; });
      row.push_back(f == flat.end() ? json() : f->second);
    }
    o.rows.push_back(row);
  }
  o.header = {pname};
  o.header.insert(o.header.end(), cols.begin(), cols.end());
  o.record = {{"command", cmd.name}, {"param", pname}, {"runs", o.rows.size()}};
  o.plot = "plt.plot(d.iloc[:, 0], d.iloc[:, 1], 'o-'); plt.xlabel(d.columns[0]); plt.ylabel(d.columns[1])";
  return o;
}

void validate_sweep(json& c) {
  const Command& cmd = registry().at(c["command"].get<std::string>());
  for (json sub : sweep_configs(c)) {
    finalize_seed(cmd.name, sub);
    cmd.validate(sub);
  }
}

std::map<std::string, Command>& registry() {
  static std::map<std::string, Command> reg = [] {
    std::map<std::string, Command> r;
    const double kf2 = density_from_kf(2.0);
    r["scatter"] = {"scatter", "zero-energy scattering solution and scattering length", "csv",
                    with_potential({{"tol-vf", 1e-8, "tolerance on |int V f - 8 pi a| / 8 pi a"},
                                    {"tol-energy", 1e-6, "tolerance on the energy identity"}}),
                    validate_potential, run_scatter};
    r["hy"] = {"hy", "three-term energy expansion", "json",
               with_potential({{"rho", 1e-3, "total density (symmetric case)"},
                               {"rho-up", -1.0, "spin-up density"},
                               {"rho-down", -1.0, "spin-down density"},
                               {"a", -1.0, "scattering length; negative = solve for the potential"},
                               {"symmetric", false, "split rho equally"}}),
               validate_hy, run_hy};
    r["fcurve"] = {"fcurve", "tabulate F(x)", "csv",
                   {{"xmin", 0.0, "first x"}, {"xmax", 4.0, "last x"}, {"n", 401, "points"}},
                   [](json& c) {
                     require(c["n"].get<int>() >= 1, "n must be >= 1");
                     require(c["xmin"].get<double>() >= 0.0, "xmin must be >= 0");
                     require(c["xmax"].get<double>() >= c["xmin"].get<double>(), "xmax must be >= xmin");
                   },
                   run_fcurve};
    r["pauli-mc"] = {"pauli-mc", "Pauli-blocked integral G", "json",
                     {{"kup", 1.0, "spin-up Fermi momentum"},
                      {"kdown", 1.0, "spin-down Fermi momentum"},
                      {"eps", 0.0, "regulator"},
                      {"samples", 100000, "Monte Carlo samples"},
                      {"seed", nullptr, "random seed; default from the config hash"},
                      {"strata", 8, "radial strata per ball"},
                      {"method", "mc", "mc | profile"},
                      {"oracle", false, "compare against the closed form (eps = 0)"}},
                     validate_pauli, run_pauli};
    r["lattice"] = {"lattice", "finite-volume lattice sums", "csv",
                    with_potential({{"boxsize", "20", "comma list of box sizes L"},
                                    {"rho-up", kf2, "spin-up density"},
                                    {"rho-down", kf2, "spin-down density"},
                                    {"cutoff", 8.0, "momentum cutoff"},
                                    {"eps", 0.01, "regulator"},
                                    {"gamma", 0.1, "split exponent"},
                                    {"truncation-tol", 1e-2, "warn when the tail bound exceeds this fraction"}},
                                   {{"potential", "gaussian"}, {"params", "1,1,5"}}),
                    validate_lattice, run_lattice};
    r["tscaling"] = {"tscaling", "density scaling of the five t-integrals", "csv",
                     {{"rho", 1e-10, "total density at the first point"},
                      {"gamma", 0.1, "split exponent"},
                      {"delta", 0.5, "regulator exponent"},
                      {"kfl", 40.0, "k_F L, kept fixed"},
                      {"points", 5, "densities"},
                      {"decades", 1.0, "density span"},
                      {"kappa", 0.02, "declared kappa for fac2"},
                      {"tol", 0.05, "slope tolerance"}},
                     validate_tscaling, run_tscaling};
    r["heatkernel"] = {"heatkernel", "heat-kernel norms and t-scaling", "csv",
                       {{"rho", 1e-6, "total density"},
                        {"gamma", 0.1, "split exponent"},
                        {"box", 0.0, "box size; 0 = 20 wavelengths of the split"},
                        {"tlo", 0.0, "smallest t; 0 = 0.01 / K^2"},
                        {"thi", 0.0, "largest t; 0 = 0.1 / K^2"},
                        {"points", 6, "t values"},
                        {"tol-l1", 1e-10, "tolerance on the L1 norm"},
                        {"slope-max", -0.70, "largest accepted exponent"}},
                       validate_heatkernel, run_heatkernel};
    r["fock-verify"] = {"fock-verify", "operator identities on a small Fock space", "csv",
                        {{"preset", "prop34-tiny", "preset name"},
                         {"modes", "", "explicit modes, e.g. up:0,0,0;1,0,0|down:0,0,0;-1,0,0"},
                         {"kernel", "v", "v | vphi | vf"},
                         {"checks", "", "comma list; empty = all"},
                         {"box", 0.0, "override L"},
                         {"kf", 0.0, "override k_F"},
                         {"v0", 0.0, "override well depth"},
                         {"range", 0.0, "override well range"},
                         {"eps", 0.0, "override regulator"},
                         {"seed", nullptr, "random seed; default from the config hash"}},
                        validate_fock, run_fock};
    r["sweep"] = {"sweep", "run another subcommand over a parameter list", "csv",
                  {{"command", "hy", "target subcommand"},
                   {"param", "rho", "parameter to vary"},
                   {"values", "1e-4,1e-3,1e-2", "comma list"},
                   {"base", "{}", "JSON object of fixed parameters"}},
                  validate_sweep, run_sweep};
    return r;
  }();
  return reg;
}

json coerce(const json& def, const json& v, const std::string& name) {
  if (!v.is_string()) {
    if (def.is_number_float() && v.is_number()) return v.get<double>();
    if ((def.is_number_integer() || def.is_null()) && v.is_number_integer()) return v;
    if (def.is_boolean() && v.is_boolean()) return v;
    if (def.is_string()) throw InputError("parameter '" + name + "' expects a string");
    throw InputError("parameter '" + name + "' has the wrong type");
  }
  const std::string s = v.get<std::string>();
  if (def.is_string()) return s;
  try {
    std::size_t pos = 0;
    if (def.is_boolean()) {
      if (s == "true" || s == "1") return true;
      if (s == "false" || s == "0") return false;
      throw InputError("");
    }
    if (def.is_number_float()) {
      double d = std::stod(s, &pos);
      if (pos != s.size()) throw InputError("");
      return d;
    }
    if (def.is_number_unsigned() || def.is_null()) {
      if (!s.empty() && s[0] == '-') throw InputError("");
      unsigned long long u = std::stoull(s, &pos, 0);
      if (pos != s.size()) throw InputError("");
      return static_cast<std::uint64_t>(u);
    }
    long long i = std::stoll(s, &pos);
    if (pos != s.size()) throw InputError("");
    return i;
  } catch (const std::exception&) {
    throw InputError("bad value '" + s + "' for --" + name);
  }
}

json resolve_config(const Command& cmd, const json& file, const std::map<std::string, std::string>& flags) {
  json c = json::object();
  for (const auto& p : cmd.params) c[p.name] = p.def;
  for (auto it = file.begin(); it != file.end(); ++it) {
    if (!c.contains(it.key())) throw InputError("unknown config key '" + it.key() + "' for " + cmd.name);
    c[it.key()] = coerce(c[it.key()], *it, it.key());
  }
  for (const auto& [k, v] : flags) {
    const Param& p = *std::find_if(cmd.params.begin(), cmd.params.end(), [&](const Param& q) { return q.name == k; });
    c[k] = coerce(p.def, v, k);
  }
  return c;
}

void finalize_seed(const std::string& name, json& c) {
  if (!c.contains("seed") || !c["seed"].is_null()) return;
  json h = c;
  h.erase("seed");
  c["seed"] = fnv1a(name + "\n" + h.dump());
}

// ---- output ----

std::string csv_field(const json& v) {
  std::string s;
  if (v.is_string())
    s = v.get<std::string>();
  else if (v.is_null())
    s = "";
  else
    s = v.dump();
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

std::string render(const Outcome& o, const std::string& emit) {
  std::ostringstream os;
  if (emit == "json") {
    json j = o.record;
    if (!o.header.empty()) {
      json rows = json::array();
      for (const auto& r : o.rows) {
        json row = json::object();
        for (std::size_t i = 0; i < o.header.size(); ++i) row[o.header[i]] = r[i];
        rows.push_back(row);
      }
      j["table"] = rows;
    }
    j["residuals"] = o.residuals;
    os << j.dump(2) << "\n";
  } else if (emit == "csv") {
    std::vector<std::string> header = o.header;
    std::vector<std::vector<json>> rows = o.rows;
    if (header.empty()) {
      std::vector<std::pair<std::string, json>> flat;
      flatten(o.record, "", flat);
      rows.emplace_back();
      for (auto& [k, v] : flat) {
        header.push_back(k);
        rows.back().push_back(v);
      }
    }
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << csv_field(header[i]);
    os << "\r\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_field(r[i]);
      os << "\r\n";
    }
  } else {
    std::vector<std::pair<std::string, json>> flat;
    flatten(o.record, "", flat);
    for (auto& [k, v] : flat) os << std::left << std::setw(28) << k << " " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  }
  return os.str();
}

json versions() {
  return {{"hyk", kVersion},
          {"compiler", __VERSION__},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"simd", kernels::variant_name(kernels::active_variant())}};
}

int execute(const Command& cmd, json cfg, const std::string& output, const std::string& emit, bool quiet) {
  finalize_seed(cmd.name, cfg);
  cmd.validate(cfg);
  std::ofstream out(output, std::ios::binary);
  if (!out) throw InputError("cannot write output '" + output + "'");
  std::ofstream man(output + ".manifest.json", std::ios::binary);
  if (!man) throw InputError("cannot write manifest '" + output + ".manifest.json'");

  auto t0 = std::chrono::steady_clock::now();
  Outcome o = cmd.run(cfg);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::string text = render(o, emit);
  out << text;
  if (!quiet) std::cout << text;
  if (!o.plot.empty() && emit == "csv") {
    std::ofstream py(output + ".plot.py");
    py << "import pandas as pd\nimport matplotlib.pyplot as plt\nd = pd.read_csv('" << output << "')\n"
       << o.plot << "\nplt.savefig('" << output << ".png')\n";
  }
  json m = {{"subcommand", cmd.name}, {"config", cfg},         {"emit", emit},
            {"output", output},       {"versions", versions()}, {"threads", thread_count()},
            {"wall_time_s", wall},    {"residuals", o.residuals}, {"checks_passed", o.ok}};
  man << m.dump(2) << "\n";
  if (!out || !man) throw ResourceError("write failed");
  return o.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dilute Fermi gas energy expansion: numerics and verification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  struct Slot {
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> opts;
    std::string config, output, emit;
    int threads = 0;
    bool quiet = false;
  };
  std::map<std::string, Slot> slots;
  std::map<std::string, CLI::App*> subs;
  for (auto& [name, cmd] : registry()) {
    Slot& s = slots[name];
    CLI::App* sub = app.add_subcommand(name, cmd.help);
    subs[name] = sub;
    s.emit = cmd.emit;
    sub->add_option("--config", s.config, "JSON config or a previous manifest");
    sub->add_option("-o,--output", s.output, "output path (default <subcommand>.<emit>)");
    sub->add_option("--emit", s.emit, "csv | json | table")->check(CLI::IsMember({"csv", "json", "table"}));
    sub->add_option("--threads", s.threads, "worker count (overrides HYK_THREADS)");
    sub->add_flag("-q,--quiet", s.quiet, "do not echo the output");
    for (const auto& p : cmd.params) {
      if (p.def.is_boolean()) {
        s.opts[p.name] = sub->add_flag_callback("--" + p.name, [&s, n = p.name] { s.values[n] = "true"; }, p.help);
      } else {
        s.opts[p.name] = sub->add_option_function<std::string>(
            "--" + p.name, [&s, n = p.name](const std::string& v) { s.values[n] = v; }, p.help);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    for (auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      Slot& s = slots[name];
      const Command& cmd = registry().at(name);
      if (s.threads < 0) throw InputError("threads must be >= 0");
      if (s.threads > 0) set_thread_count(s.threads);
      json file = json::object();
      if (!s.config.empty()) {
        std::ifstream in(s.config);
        if (!in) throw InputError("cannot read config '" + s.config + "'");
        json j = json::parse(in);
        if (j.contains("subcommand") && j.contains("config")) {
          if (j["subcommand"] != name) throw InputError("manifest belongs to '" + j["subcommand"].get<std::string>() + "'");
          if (s.emit == cmd.emit && j.contains("emit")) s.emit = j["emit"].get<std::string>();
          j = j["config"];
        }
        if (!j.is_object()) throw InputError("config must be a JSON object");
        file = j;
      }
      json cfg = resolve_config(cmd, file, s.values);
      std::string out = s.output.empty() ? name + "." + (s.emit == "table" ? "txt" : s.emit) : s.output;
      return execute(cmd, cfg, out, s.emit, s.quiet);
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
