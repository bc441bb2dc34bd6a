#include "blowup_lab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "blowup_lab/bernstein.hpp"
#include "blowup_lab/blowup.hpp"
#include "blowup_lab/error.hpp"
#include "blowup_lab/heat_kernel.hpp"
#include "blowup_lab/noise.hpp"
#include "blowup_lab/numerics.hpp"
#include "blowup_lab/simulator.hpp"
#include "blowup_lab/subordinator.hpp"

namespace blowup_lab {

namespace {

using json = nlohmann::json;

std::string str(std::string_view s) { return std::string(s); }

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json verdict_json(const AssumptionVerdict& v) {
  const auto& d = v.diagnostics;
  return {{"a2", str(to_string(v.a2))},
          {"a3", str(to_string(v.a3))},
          {"grow", str(to_string(v.grow))},
          {"rho0", v.rho0},
          {"rho_inf", v.rho_inf},
          {"diagnostics",
           {{"zero_refined_exponent", d.zero_refined_exponent},
            {"zero_fit_residual", d.zero_fit_residual},
            {"probe_upper", d.probe_upper},
            {"probe_eps", d.probe_eps},
            {"probe_values", d.probe_values},
            {"log_exponent", d.log_exponent},
            {"grow_limit", d.grow_limit}}}};
}

json report_json(const BlowupReport& r) {
  json j = {{"mode", str(to_string(r.mode))},
            {"verdicts", verdict_json(r.verdicts)},
            {"A", r.A},
            {"B", r.B},
            {"exponent", r.exponent},
            {"constants", r.constants},
            {"notes", r.notes}};
  const auto opt = [&](const char* key, const std::optional<double>& v) {
    j[key] = v ? json(*v) : json(nullptr);
  };
  opt("t0", r.t0);
  opt("threshold", r.threshold);
  opt("horizon", r.horizon);
  opt("t_target", r.t_target);
  return j;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

template <class T>
T take(json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  T v = obj.at(key).get<T>();
  obj.erase(key);
  return v;
}

void reject_unknown(const json& obj, const std::string& where) {
  if (!obj.empty()) {
    throw DomainError("config: unknown key '" + obj.begin().key() + "' in " + where);
  }
}

struct SimJob {
  SimConfig config;
  Probes probes;
};

SimJob parse_sim_config(json j) {
  if (!j.is_object()) throw DomainError("config: expected a JSON object");
  SimJob job;
  auto& c = job.config;
  c.spec = parse_spec(take<std::string>(j, "phi", "stable:1.5"));
  c.dim = take<int>(j, "dim", c.dim);
  c.half_width = take<double>(j, "half_width", c.half_width);
  c.cells = take<std::size_t>(j, "cells", c.cells);
  c.dt = take<double>(j, "dt", c.dt);
  c.t_end = take<double>(j, "t_end", c.t_end);
  c.noise = parse_kernel(take<std::string>(j, "noise", "white"));
  c.paths = take<std::size_t>(j, "paths", c.paths);
  c.escape_cap = take<double>(j, "escape_cap", c.escape_cap);
  c.seed = take<std::uint64_t>(j, "seed", c.seed);
  c.record_every = take<std::size_t>(j, "record_every", c.record_every);

  if (j.contains("sigma")) {
    json s = j.at("sigma");
    j.erase("sigma");
    if (s.is_string()) s = json{{"kind", s}};
    const auto kind = take<std::string>(s, "kind", "zero");
    if (kind == "power") {
      c.sigma = Sigma::power(take<double>(s, "gamma", 0.5));
    } else if (kind == "lipschitz_test") {
      c.sigma = Sigma::lipschitz_test();
    } else if (kind == "zero") {
      c.sigma = Sigma::zero();
    } else {
      throw DomainError("config: sigma kind must be power, lipschitz_test or zero");
    }
    reject_unknown(s, "sigma");
  }

  if (j.contains("u0")) {
    json u = j.at("u0");
    j.erase("u0");
    const auto kind = take<std::string>(u, "kind", "constant");
    if (kind == "constant") {
      c.u0 = InitialCondition::constant(take<double>(u, "kappa", 1.0));
    } else if (kind == "bump") {
      const double k = take<double>(u, "k_u0", 1.0);
      c.u0 = InitialCondition::bump(k, take<double>(u, "radius", 0.5));
    } else if (kind == "custom") {
      c.u0 = InitialCondition::custom(take<std::vector<double>>(u, "samples", {}));
    } else {
      throw DomainError("config: u0 kind must be constant, bump or custom");
    }
    reject_unknown(u, "u0");
  }

  if (j.contains("probes")) {
    json p = j.at("probes");
    j.erase("probes");
    job.probes.points = take<std::vector<std::vector<double>>>(p, "points", {});
    for (const auto& pr : take<std::vector<std::vector<std::size_t>>>(p, "pairs", {})) {
      if (pr.size() != 2) throw DomainError("config: probe pairs need two indices");
      job.probes.pairs.emplace_back(pr[0], pr[1]);
    }
    reject_unknown(p, "probes");
  }
  if (job.probes.points.empty()) job.probes.points.assign(1, std::vector<double>(c.dim, 0.0));
  reject_unknown(j, "the top level");
  validate(c);
  return job;
}

std::string moments_csv(const MomentCurve& mc) {
  std::string s = "time,probe_id,moment,stderr,escape_fraction\n";
  const auto row = [&](double t, const std::string& id, double m, double e, double esc) {
    s += number(t) + "," + id + "," + number(m) + "," + number(e) + "," + number(esc) + "\n";
  };
  for (std::size_t r = 0; r < mc.times.size(); ++r) {
    const double t = mc.times[r];
    const double esc = mc.escape_fraction[r];
    for (std::size_t q = 0; q < mc.second_moment.size(); ++q) {
      row(t, "second:" + std::to_string(q), mc.second_moment[q][r], mc.second_stderr[q][r], esc);
      row(t, "mean:" + std::to_string(q), mc.first_moment[q][r], mc.first_stderr[q][r], esc);
    }
    for (std::size_t q = 0; q < mc.cross_moment.size(); ++q) {
      row(t, "cross:" + std::to_string(q), mc.cross_moment[q][r], mc.cross_stderr[q][r], esc);
    }
  }
  return s;
}

std::string join(const std::vector<std::string>& args) {
  std::string s = "blowup-lab";
  for (const auto& a : args) s += " " + a;
  return s;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical companion for blowup of SPDEs driven by Bernstein functions of the "
               "Laplacian",
               "blowup-lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string phi = "stable:1.5";
  std::string kernel;
  std::string mode;
  std::string config_path;
  std::string out_dir = ".";
  int dim = 1;
  double t = 1.0;
  std::vector<double> xs;
  std::vector<double> rs;
  std::size_t n = 0;
  double eps = 1.0;
  double truncation = 0.0;
  double gamma = 0.5;
  std::optional<double> kappa;
  std::optional<double> k_u0;
  std::optional<double> t_target;
  double R = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> seed_override;

  auto add_phi = [&](CLI::App* s) {
    s->add_option("--phi", phi, "Bernstein function id, e.g. stable:1.5, gamma, drift");
  };

  auto* bernstein = app.add_subcommand("bernstein", "Bernstein catalog");
  bernstein->require_subcommand(1);
  auto* bern_check = bernstein->add_subcommand("check", "Assumption verdicts for phi");
  add_phi(bern_check);

  auto* subord = app.add_subcommand("subord", "Subordinator sampling");
  subord->require_subcommand(1);
  auto* subord_check = subord->add_subcommand("check", "Laplace identity and window checks");
  add_phi(subord_check);
  subord_check->add_option("--t", t, "time");
  subord_check->add_option("--r", rs, "Laplace arguments")->default_str("1");
  subord_check->add_option("--n", n, "draws (default 100000)");
  subord_check->add_option("--eps", truncation, "jump truncation (<= 0 selects automatically)");
  subord_check->add_option("--seed", seed, "seed");

  auto* kern = app.add_subcommand("kernel", "Subordinated heat kernel");
  kern->require_subcommand(1);
  auto* kern_eval = kern->add_subcommand("eval", "p_t(x)");
  add_phi(kern_eval);
  kern_eval->add_option("--d", dim, "dimension 1..3");
  kern_eval->add_option("--t", t, "time");
  kern_eval->add_option("--x", xs, "point (d coordinates) or radius");
  kern_eval->add_option("--n", n, "Monte Carlo draws for the subordination route");
  kern_eval->add_option("--seed", seed, "seed");
  auto* kern_verify = kern->add_subcommand("verify", "Pointwise, factorization and L2 bounds");
  add_phi(kern_verify);
  kern_verify->add_option("--d", dim, "dimension 1..3");
  kern_verify->add_option("--t", t, "time");

  auto* noise = app.add_subcommand("noise", "Noise covariances");
  noise->require_subcommand(1);
  auto* dalang = noise->add_subcommand("dalang", "Dalang integral and K_{R,f}");
  add_phi(dalang);
  dalang->add_option("--kernel", kernel, "white, riesz:b, exp, ou:a, poisson, cauchy")
      ->required();
  dalang->add_option("--d", dim, "dimension 1..3");
  dalang->add_option("--R", R, "ball radius for K_{R,f}");

  auto* blow = app.add_subcommand("blowup", "Renewal inequalities and thresholds");
  blow->require_subcommand(1);
  auto* report = blow->add_subcommand("report", "Theorem-level blowup report");
  add_phi(report);
  report->add_option("--mode", mode,
                     "white_lower_bounded, white_energy, colored_lower_bounded, colored_energy, "
                     "dirichlet")
      ->required();
  report->add_option("--kernel", kernel, "noise kernel id");
  report->add_option("--d", dim, "dimension");
  report->add_option("--gamma", gamma, "nonlinearity excess");
  report->add_option("--kappa", kappa, "inf u0");
  report->add_option("--k-u0", k_u0, "int of u0 over B(0,1)");
  report->add_option("--R", R, "ball radius");
  report->add_option("--t", t_target, "target blowup time for the threshold");
  report->add_option("--c1", c1, "dirichlet floor constant");
  report->add_option("--c2", c2, "dirichlet kernel constant");
  auto* identity = blow->add_subcommand("identity", "Renewal integral identity");
  add_phi(identity);
  identity->add_option("--eps", eps, "exponent");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo moment curves");
  simulate->add_option("--config", config_path, "JSON configuration")->required();
  simulate->add_option("--out", out_dir, "output directory");
  simulate->add_option("--seed", seed_override, "override the configured seed");

  if (args.empty()) {
    out << app.help();
    return 2;
  }
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    json result;
    if (bern_check->parsed()) {
      const auto spec = parse_spec(phi);
      result = verdict_json(check_assumptions(spec));
      result["phi"] = spec.id();
    } else if (subord_check->parsed()) {
      const auto spec = parse_spec(phi);
      const std::size_t draws = n ? n : 100000;
      const SubordinatorSampler sampler(spec, seed, truncation);
      if (rs.empty()) rs = {1.0};
      json checks = json::array();
      const auto s = sampler.sample(t, draws);
      for (double r : rs) {
        const auto c = laplace_check(spec, s, r, t);
        checks.push_back({{"r", r},
                          {"empirical", c.empirical},
                          {"exact", c.exact},
                          {"stderr", c.stderr_},
                          {"zscore", c.zscore}});
      }
      const auto w = window_probability(sampler, t, draws);
      result = {{"phi", spec.id()},
                {"strategy", str(to_string(sampler.strategy()))},
                {"t", t},
                {"n", draws},
                {"laplace", checks},
                {"window",
                 {{"probability", w.window},
                  {"stderr", w.window_stderr},
                  {"floor", w.window_floor},
                  {"ok", w.window_ok}}},
                {"below",
                 {{"probability", w.below},
                  {"stderr", w.below_stderr},
                  {"floor", w.below_floor},
                  {"ok", w.below_ok}}}};
    } else if (kern_eval->parsed()) {
      const auto spec = parse_spec(phi);
      if (xs.empty()) xs = {0.0};
      std::optional<SubordinatorSampler> sampler;
      if (n) sampler.emplace(spec, seed);
      const auto engine = sampler ? HeatKernelEngine(spec, dim, *sampler) : HeatKernelEngine(spec, dim);
      double radius = 0.0;
      if (xs.size() == 1) {
        radius = std::abs(xs[0]);
      } else {
        if (static_cast<int>(xs.size()) != dim) throw DomainError("--x needs 1 or d values");
        for (double v : xs) radius += v * v;
        radius = std::sqrt(radius);
      }
      result = {{"phi", spec.id()}, {"d", dim}, {"t", t}, {"radius", radius},
                {"value", kernel_value_radial(engine, t, radius)}};
      if (n) {
        const auto mc = kernel_value_mc(engine, t, radius, n);
        result["mc"] = {{"estimate", mc.estimate}, {"stderr", mc.stderr_}, {"n", n}};
      }
    } else if (kern_verify->parsed()) {
      const auto spec = parse_spec(phi);
      const auto rep = verify_kernel_bounds(HeatKernelEngine(spec, dim), t);
      result = {{"phi", spec.id()},
                {"d", dim},
                {"t", t},
                {"lower",
                 {{"radius", rep.lower_radius},
                  {"ratio_min", rep.lower_ratio_min},
                  {"constant", rep.lower_constant},
                  {"ok", rep.lower_ok}}},
                {"factorization",
                 {{"p_t_zero", rep.p_t_zero},
                  {"applicable", rep.factor_applicable},
                  {"min_gap", rep.factor_applicable ? json(rep.factor_min) : json(nullptr)},
                  {"ok", rep.factor_ok}}},
                {"l2",
                 {{"times", rep.l2_times},
                  {"ratios", rep.l2_ratios},
                  {"constant", rep.l2_constant},
                  {"ok", rep.l2_ok}}},
                {"ok", rep.ok()}};
      out << result.dump(2) << "\n";
      return rep.ok() ? 0 : 2;
    } else if (dalang->parsed()) {
      const auto spec = parse_spec(phi);
      const auto k = parse_kernel(kernel);
      const auto dr = dalang_check(k, spec, dim);
      result = {{"phi", spec.id()},
                {"kernel", k.id()},
                {"d", dim},
                {"finite", dr.finite},
                {"value", dr.finite ? json(dr.value) : json(nullptr)},
                {"tail_slope", dr.tail_slope},
                {"origin_slope", dr.origin_slope}};
      if (k.kind() != NoiseKind::white) {
        const auto ki = k_inf(k, R, dim);
        result["K_Rf"] = {{"R", R}, {"value", ki.value}, {"color_holds", ki.color_holds}};
      }
    } else if (report->parsed()) {
      const auto spec = parse_spec(phi);
      std::optional<NoiseKernel> nk;
      if (!kernel.empty()) nk = parse_kernel(kernel);
      ReportParams p;
      p.dim = dim;
      p.gamma = gamma;
      p.kappa = kappa;
      p.k_u0 = k_u0;
      p.R = R;
      p.t_target = t_target;
      p.dirichlet_c1 = c1;
      p.dirichlet_c2 = c2;
      result = report_json(theorem_report(parse_mode(mode), spec, nk, p));
      result["phi"] = spec.id();
      if (nk) result["kernel"] = nk->id();
    } else if (identity->parsed()) {
      const auto spec = parse_spec(phi);
      const auto r = integral_identity_check(spec, eps);
      const auto fin = [](bool f, double v) { return f ? json(v) : json("divergent"); };
      result = {{"phi", spec.id()},
                {"eps", eps},
                {"lhs", fin(r.lhs_finite, r.lhs)},
                {"rhs", fin(r.rhs_finite, r.rhs)},
                {"reldiff", r.lhs_finite && r.rhs_finite ? json(r.reldiff) : json(nullptr)},
                {"lhs_tail_slope", r.lhs_tail_slope},
                {"rhs_origin_slope", r.rhs_origin_slope},
                {"consistent", r.consistent()}};
    } else if (simulate->parsed()) {
      std::ifstream in(config_path);
      if (!in) throw DomainError("cannot read config file " + config_path);
      json cfg;
      try {
        cfg = json::parse(in);
      } catch (const json::exception& e) {
        throw DomainError(std::string("config: ") + e.what());
      }
      if (seed_override) cfg["seed"] = *seed_override;
      const std::string digest = hex(fnv1a(cfg.dump()));
      SimJob job;
      try {
        job = parse_sim_config(cfg);
      } catch (const json::exception& e) {
        throw DomainError(std::string("config: ") + e.what());
      }
      const auto start = std::chrono::steady_clock::now();
      const Simulator sim(job.config);
      const auto mc = sim.run_moments(job.probes);
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

      std::filesystem::create_directories(out_dir);
      const auto csv_path = std::filesystem::path(out_dir) / "moments.csv";
      const auto manifest_path = std::filesystem::path(out_dir) / "manifest.json";
      std::ofstream(csv_path) << moments_csv(mc);
      const auto& c = job.config;
      json probes = json::array();
      for (std::size_t q = 0; q < job.probes.points.size(); ++q) {
        probes.push_back({{"point", job.probes.points[q]}, {"node", mc.probe_nodes[q]}});
      }
      json pairs = json::array();
      for (const auto& [a, b] : job.probes.pairs) pairs.push_back({a, b});
      const json manifest = {{"command", join(args)},
                             {"config_digest", digest},
                             {"seed", c.seed},
                             {"version", kToolVersion},
                             {"grid",
                              {{"dim", c.dim},
                               {"cells", c.cells},
                               {"half_width", c.half_width},
                               {"spacing", sim.spacing()},
                               {"steps", sim.steps()},
                               {"dt", sim.step_size()}}},
                             {"phi", c.spec.id()},
                             {"noise", c.noise.id()},
                             {"sigma", str(to_string(c.sigma.kind))},
                             {"paths", c.paths},
                             {"escape_cap", c.escape_cap},
                             {"probes", probes},
                             {"pairs", pairs},
                             {"moments", "truncated at escape_cap"},
                             {"wall_time_s", wall}};
      std::ofstream(manifest_path) << manifest.dump(2) << "\n";
      result = {{"csv", csv_path.string()},
                {"manifest", manifest_path.string()},
                {"config_digest", digest},
                {"final_escape_fraction", mc.escape_fraction.back()}};
    }
    out << result.dump(2) << "\n";
    return 0;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace blowup_lab
