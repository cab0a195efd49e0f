#include "klab/cli.hpp"

#include <cmath>
#include <iostream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "klab/errors.hpp"
#include "klab/extremal.hpp"
#include "klab/fiber.hpp"
#include "klab/grid.hpp"
#include "klab/io.hpp"
#include "klab/model.hpp"
#include "klab/solver.hpp"

namespace klab::cli {

namespace {

using nlohmann::json;

json config_json(const RunConfig& c) {
  return json{{"N", c.N},         {"p", c.p},       {"q", c.q},
              {"a", c.a},         {"b", c.b},       {"alpha", c.alpha},
              {"R", c.R},         {"grid_n", c.grid_n},
              {"lambda", c.has_lambda ? json(c.lambda) : json()},
              {"eps", c.eps},     {"local", c.local}, {"delta", c.delta},
              {"seed", c.seed},   {"out", c.out}};
}

struct Context {
  KirchhoffModel model;
  ProblemExponents exps;
  GridPtr grid;
  std::string hash;
  json report;
};

Context make_context(const RunConfig& cfg, const std::string& subcommand) {
  Context ctx{KirchhoffModel::make(cfg.a, cfg.b, cfg.alpha),
              ProblemExponents::make(cfg.N, cfg.p, cfg.q),
              RadialGrid::make(cfg.N, cfg.R, cfg.grid_n),
              {},
              {}};
  ctx.hash = hash_hex(fnv1a64(cfg.canonical_json(subcommand)));
  ctx.report["config"] = config_json(cfg);
  ctx.report["config_hash"] = ctx.hash;
  ctx.report["subcommand"] = subcommand;
  return ctx;
}

void emit(const RunConfig& cfg, const std::string& name, const std::string& content) {
  ensure_directory(cfg.out);
  write_file(cfg.out + "/" + name, content);
}

void emit_csv(const RunConfig& cfg, const std::string& name, const CsvWriter& csv) {
  ensure_directory(cfg.out);
  write_file(cfg.out + "/" + name, csv.str());
}

void emit_report(const Context& ctx, const RunConfig& cfg) {
  ensure_directory(cfg.out);
  write_file(cfg.out + "/report.json", ctx.report.dump(2) + "\n");
}

json hypothesis_json(const HypothesisReport& h) {
  return json{{"rho1", h.rho1},
              {"rho2", h.rho2},
              {"rho2_witness_r", h.rho2_witness_r},
              {"beta1", h.beta1},
              {"beta2", h.beta2},
              {"gamma1", h.gamma1},
              {"threshold_i", h.degenerate_alpha ? json() : json(h.threshold_i)},
              {"threshold_ii", h.degenerate_alpha ? json() : json(h.threshold_ii)},
              {"lhs", h.lhs},
              {"beta1_margin", h.beta1_margin},
              {"gamma1_margin", h.gamma1_margin},
              {"degenerate_alpha", h.degenerate_alpha},
              {"mhat_infimum", h.mhat_infimum},
              {"note", h.note}};
}

json estimate_json(const ExtremalEstimate& e) {
  json j{{"value", e.value},
         {"method", e.method},
         {"family_best", e.family_best},
         {"refine_gain", e.refine_gain},
         {"family_values", e.family_values}};
  if (e.method == "energy-bisection") {
    j["bracket_lo"] = e.bracket_lo;
    j["bracket_hi"] = e.bracket_hi;
    j["predicate_evals"] = e.predicate_evals;
    j["hit_lambda_max"] = e.hit_lambda_max;
  } else {
    j["t_opt"] = e.t_opt;
  }
  return j;
}

CsvWriter trace_csv(const std::vector<std::array<double, 3>>& trace, const Context& ctx) {
  CsvWriter csv({"iteration", "energy", "residual"});
  csv.comment("config_hash=" + ctx.hash);
  for (const auto& row : trace) csv.row({row[0], row[1], row[2]});
  return csv;
}

CsvWriter profile_csv(const RadialFunction& u, const Context& ctx) {
  CsvWriter csv({"r", "u"});
  csv.comment("config_hash=" + ctx.hash);
  for (int i = 0; i < u.size(); ++i) csv.row({u.grid->r[i], u.v[i]});
  return csv;
}

int run_check(const RunConfig& cfg, Context& ctx) {
  const HypothesisReport rep = check_hypotheses(ctx.model, ctx.exps);
  const RatioScan mh = inf_mhat_ratio(ctx.model, ctx.exps);
  const RatioScan mr = inf_m_ratio(ctx.model, ctx.exps);
  const ComparisonCp cp = comparison_cp(ctx.exps);
  ctx.report["hypotheses"] = hypothesis_json(rep);
  ctx.report["sobolev"] = {{"S_N", sobolev_optimal_sn(cfg.N, cfg.p)},
                           {"S", ctx.exps.S},
                           {"pstar", ctx.exps.pstar}};
  ctx.report["oracles"] = {
      {"inf_mhat_ratio",
       {{"value", mh.value}, {"decayed_to_zero", mh.decayed_to_zero},
        {"at_infinity", mh.at_infinity}, {"argmin", mh.argmin}}},
      {"inf_m_ratio",
       {{"value", mr.value}, {"decayed_to_zero", mr.decayed_to_zero},
        {"at_infinity", mr.at_infinity}, {"argmin", mr.argmin}}}};
  ctx.report["comparison_cp"] = {{"cp", cp.cp}, {"ratio", cp.ratio}};
  emit_report(ctx, cfg);
  return rep.beta1 ? kExitOk : kExitHypothesis;
}

int run_fiber(const RunConfig& cfg, Context& ctx) {
  RadialFunction u = bubble(cfg.eps, ctx.grid, ctx.exps, /*normalized=*/true);
  const FiberConstants fc = FiberConstants::of(u, ctx.exps);
  const FiberSolution s0 = lambda0_of_u(fc, ctx.model, ctx.exps);
  const double lambda = cfg.has_lambda ? cfg.lambda : s0.lambda0;
  emit(cfg, "fiber.csv",
       "# config_hash=" + ctx.hash + "\n" +
           fiber_profile_csv(fc, lambda, ctx.model, ctx.exps));
  ctx.report["fiber"] = {{"eps", cfg.eps},
                         {"lambda", lambda},
                         {"A", fc.A},
                         {"B", fc.B},
                         {"C", fc.C},
                         {"lambda0", s0.lambda0},
                         {"t0", s0.t0}};
  emit_report(ctx, cfg);
  return kExitOk;
}

int run_lambda_level(const RunConfig& cfg, Context& ctx, int level) {
  if (level == 1) {
    const HypothesisReport rep = check_hypotheses(ctx.model, ctx.exps);
    if (!rep.gamma1) throw HypothesisError("lambda1 requires the strict coefficient bound");
  }
  RadialFunction u = bubble(cfg.eps, ctx.grid, ctx.exps, /*normalized=*/true);
  const FiberConstants fc = FiberConstants::of(u, ctx.exps);
  if (level == 0) {
    const FiberSolution s = lambda0_of_u(fc, ctx.model, ctx.exps);
    ctx.report["lambda0"] = {{"eps", cfg.eps}, {"value", s.lambda0}, {"t0", s.t0}};
  } else {
    const FiberSolution s = lambda1_of_u(fc, ctx.model, ctx.exps);
    ctx.report["lambda1"] = {{"eps", cfg.eps}, {"value", s.lambda1}, {"t1", s.t1}};
  }
  emit_report(ctx, cfg);
  return kExitOk;
}

int run_extremal(const RunConfig& cfg, Context& ctx) {
  const ExtremalReport rep = estimate_extremal(ctx.model, ctx.exps, ctx.grid, cfg.seed);
  ctx.report["lambda0_star"] = {{"quotient_min", estimate_json(rep.quotient0)},
                                {"energy_bisection", estimate_json(rep.bisection0)},
                                {"agreement_rel", rep.agreement_rel}};
  ctx.report["lambda1_star"] = estimate_json(rep.quotient1);
  std::vector<double> eps_list;
  for (int k = 0; k < 10; ++k)
    eps_list.push_back(std::exp(std::log(1e-1) + (std::log(1e-4) - std::log(1e-1)) * k / 9.0));
  emit(cfg, "bubble_lambda0.csv",
       "# config_hash=" + ctx.hash + "\n" +
           bubble_lambda0_csv(ctx.model, ctx.exps, ctx.grid, eps_list));
  emit_report(ctx, cfg);
  return kExitOk;
}

int run_minimize(const RunConfig& cfg, Context& ctx) {
  if (!cfg.has_lambda)
    throw std::invalid_argument("minimize requires --lambda");
  DescentConfig dcfg;
  dcfg.seed = cfg.seed;
  if (cfg.local) {
    BisectionConfig bcfg;
    bcfg.descent = dcfg;
    const ExtremalEstimate l0 = lambda0_star_by_bisection(ctx.model, ctx.exps, ctx.grid, bcfg);
    if (l0.argmin.size() == 0)
      throw NumericalError("minimize --local: no nonzero warm start available");
    const double nw = std::pow(grad_norm_p(l0.argmin, ctx.exps), 1.0 / ctx.exps.p);
    const double delta = cfg.delta > 0.0 ? cfg.delta : 0.2 * nw;
    const LocalMinimizeResult lr =
        minimize_local(cfg.lambda, l0.argmin, delta, ctx.model, ctx.exps, dcfg);
    ctx.report["minimize_local"] = {{"lambda", cfg.lambda},
                                    {"value", lr.value},
                                    {"distance", lr.distance},
                                    {"delta", delta},
                                    {"constraint_active", lr.constraint_active},
                                    {"converged", lr.converged},
                                    {"iters", lr.iters},
                                    {"lambda0_star", l0.value}};
    auto pcsv = profile_csv(lr.u, ctx);
    emit_csv(cfg, "profile.csv", pcsv);
    emit_report(ctx, cfg);
    return kExitOk;
  }
  const MinimizeResult mr =
      minimize_global(cfg.lambda, ctx.model, ctx.exps, ctx.grid, dcfg);
  // Deterministic trace of the winning start.
  DescentConfig tcfg = dcfg;
  tcfg.record_trace = true;
  const DescentResult tr = descend(mr.best_start, cfg.lambda, ctx.model, ctx.exps, tcfg);
  auto tcsv = trace_csv(tr.trace, ctx);
  emit_csv(cfg, "trace.csv", tcsv);
  auto pcsv = profile_csv(mr.u, ctx);
  emit_csv(cfg, "profile.csv", pcsv);
  ctx.report["minimize"] = {{"lambda", cfg.lambda},
                            {"value", mr.value},
                            {"norm_p", grad_norm_p(mr.u, ctx.exps)},
                            {"has_nonzero", mr.has_nonzero},
                            {"best_nonzero_value", mr.has_nonzero ? json(mr.best_nonzero_value) : json()},
                            {"starts", mr.starts},
                            {"total_iters", mr.total_iters}};
  emit_report(ctx, cfg);
  return kExitOk;
}

int run_mpa(const RunConfig& cfg, Context& ctx) {
  const HypothesisReport rep = check_hypotheses(ctx.model, ctx.exps);
  if (!rep.gamma1)
    throw HypothesisError("mountain pass requires the strict coefficient bound");
  DescentConfig dcfg;
  dcfg.seed = cfg.seed;
  BisectionConfig bcfg;
  bcfg.descent = dcfg;
  const ExtremalEstimate l0 = lambda0_star_by_bisection(ctx.model, ctx.exps, ctx.grid, bcfg);
  const double lambda = cfg.has_lambda ? cfg.lambda : l0.value * (1.0 - 1e-3);

  // Endpoint: nonzero near-minimizer at the extremal parameter.
  const MinimizeResult at_star =
      minimize_global(l0.value, ctx.model, ctx.exps, ctx.grid, dcfg,
                      std::span<const RadialFunction>(&l0.argmin, 1));
  if (!at_star.has_nonzero)
    throw NumericalError("mpa: no nonzero near-minimizer at the extremal parameter");

  MountainPassConfig mcfg;
  mcfg.seed = cfg.seed;
  mcfg.record_trace = true;
  const MountainPassResult mp =
      mountain_pass(lambda, at_star.best_nonzero, ctx.model, ctx.exps, mcfg);
  auto tcsv = trace_csv(mp.trace, ctx);
  emit_csv(cfg, "trace.csv", tcsv);
  auto pcsv = profile_csv(mp.critical_point, ctx);
  emit_csv(cfg, "profile.csv", pcsv);
  ctx.report["mpa"] = {{"lambda", lambda},
                       {"lambda0_star", l0.value},
                       {"c_lambda", mp.c_lambda},
                       {"sigma", mp.sigma},
                       {"rim_radius", mp.rim_radius},
                       {"residual", mp.residual},
                       {"iters", mp.iters},
                       {"converged", mp.converged},
                       {"endpoint_energy",
                        energy(at_star.best_nonzero, lambda, ctx.model, ctx.exps).phi}};
  emit_report(ctx, cfg);
  return mp.converged ? kExitOk : kExitNumerical;
}

int run_nonexist(const RunConfig& cfg, Context& ctx) {
  if (!cfg.has_lambda)
    throw std::invalid_argument("nonexist requires --lambda");
  DescentConfig dcfg;
  dcfg.seed = cfg.seed;
  const TrialFamily fam = make_trial_family(ctx.grid, ctx.exps, cfg.seed, 12, 38);
  const NonexistenceReport rep =
      certify_nonexistence(cfg.lambda, fam.members, ctx.model, ctx.exps, dcfg);
  json witnesses = json::array();
  for (std::size_t i = 0; i < rep.detail.size(); ++i) {
    const auto& d = rep.detail[i];
    if (!d.dpsi_positive || !d.collapsed)
      witnesses.push_back({{"sample", i},
                           {"min_dpsi", d.min_dpsi},
                           {"final_norm_p", d.final_norm_p}});
  }
  ctx.report["nonexistence"] = {{"lambda", cfg.lambda},
                                {"passed", rep.passed},
                                {"samples", rep.samples},
                                {"dpsi_failures", rep.dpsi_failures},
                                {"descent_failures", rep.descent_failures},
                                {"min_dpsi", rep.min_dpsi},
                                {"max_final_norm_p", rep.max_final_norm_p},
                                {"min_energy_found", rep.min_energy_found},
                                {"witnesses", witnesses}};
  emit_report(ctx, cfg);
  return kExitOk;
}

int run_bubbles(const RunConfig& cfg, Context& ctx) {
  CsvWriter csv({"eps", "grad_norm_p", "crit_norm", "quotient"});
  csv.comment("config_hash=" + ctx.hash);
  std::vector<double> eps_list = {1e-2, 1e-3, 1e-4, 1e-5};
  std::vector<double> lv, le, lgap;
  double max_quotient = 0.0;
  bool monotone = true;
  double prev_q = 0.0;
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const double eps = eps_list[k];
    RadialFunction v = bubble(eps, ctx.grid, ctx.exps, /*normalized=*/false);
    const double A = grad_norm_p(v, ctx.exps);
    const double crit = lebesgue_norm(v, ctx.exps.pstar);
    const double quotient = crit / std::pow(A, ctx.exps.pstar / ctx.exps.p);
    csv.row({eps, A, crit, quotient});
    lv.push_back(std::log(A));
    le.push_back(std::log(eps));
    if (ctx.exps.S > quotient) lgap.push_back(std::log(ctx.exps.S - quotient));
    else lgap.push_back(std::log(1e-300));
    max_quotient = std::max(max_quotient, quotient);
    if (k > 0 && quotient <= prev_q) monotone = false;
    prev_q = quotient;
  }
  // Least-squares slopes of log-values against log-eps.
  auto slope = [&](const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(le.size());
    for (int i = 0; i < n; ++i) {
      sx += le[i]; sy += y[i]; sxx += le[i] * le[i]; sxy += le[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  const double slope_norm = slope(lv);
  const double slope_gap = slope(lgap);
  ctx.report["bubbles"] = {{"eps", eps_list},
                           {"slope_norm_p", slope_norm},
                           {"expected_slope_norm_p", -(cfg.N - cfg.p) / cfg.p},
                           {"gap_exponent", slope_gap},
                           {"quotient_monotone_increasing", monotone},
                           {"max_quotient", max_quotient},
                           {"S", ctx.exps.S}};
  emit_csv(cfg, "bubbles.csv", csv);
  emit_report(ctx, cfg);
  return kExitOk;
}

}  // namespace

std::string RunConfig::canonical_json(const std::string& subcommand) const {
  json j = config_json(*this);
  j["subcommand"] = subcommand;
  return j.dump();
}

int run(const std::string& subcommand, const RunConfig& cfg) {
  try {
    Context ctx = make_context(cfg, subcommand);
    if (subcommand == "check") return run_check(cfg, ctx);
    if (subcommand == "fiber") return run_fiber(cfg, ctx);
    if (subcommand == "lambda0") return run_lambda_level(cfg, ctx, 0);
    if (subcommand == "lambda1") return run_lambda_level(cfg, ctx, 1);
    if (subcommand == "extremal") return run_extremal(cfg, ctx);
    if (subcommand == "minimize") return run_minimize(cfg, ctx);
    if (subcommand == "mpa") return run_mpa(cfg, ctx);
    if (subcommand == "nonexist") return run_nonexist(cfg, ctx);
    if (subcommand == "bubbles") return run_bubbles(cfg, ctx);
    std::cerr << "unknown subcommand: " << subcommand << "\n";
    return kExitUsage;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis failure: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int run_main(int argc, const char* const* argv) {
  CLI::App app{"p-Kirchhoff critical-exponent energy laboratory on radial domains"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override its values");

  // Options are registered on the app so they apply to every subcommand.
  auto* oN = app.add_option("--N", cfg.N, "space dimension");
  auto* op = app.add_option("--p", cfg.p, "gradient exponent in (1, N)");
  auto* oq = app.add_option("--q", cfg.q, "perturbation exponent in (p, pstar)");
  auto* oa = app.add_option("--a", cfg.a, "constant coefficient");
  auto* ob = app.add_option("--b", cfg.b, "nonlocal coefficient");
  auto* oal = app.add_option("--alpha", cfg.alpha, "coefficient growth exponent");
  auto* oR = app.add_option("--R", cfg.R, "ball radius");
  auto* on = app.add_option("--grid-n", cfg.grid_n, "radial node count");
  auto* ol = app.add_option("--lambda", cfg.lambda, "perturbation parameter");
  auto* oe = app.add_option("--eps", cfg.eps, "bubble scale for trial functions");
  auto* olo = app.add_flag("--local", cfg.local, "minimize: trust-ball local run");
  auto* od = app.add_option("--delta", cfg.delta, "local trust radius");
  auto* os = app.add_option("--seed", cfg.seed, "random seed");
  auto* oo = app.add_option("--out", cfg.out, "output directory");

  const char* names[] = {"check", "fiber", "lambda0", "lambda1", "extremal",
                         "minimize", "mpa", "nonexist", "bubbles"};
  for (const char* n : names) app.add_subcommand(n)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream ss;
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (!config_path.empty()) {
    try {
      const auto j = nlohmann::json::parse(read_file(config_path));
      RunConfig file;
      file.N = j.value("N", cfg.N);
      file.p = j.value("p", cfg.p);
      file.q = j.value("q", cfg.q);
      file.a = j.value("a", cfg.a);
      file.b = j.value("b", cfg.b);
      file.alpha = j.value("alpha", cfg.alpha);
      file.R = j.value("R", cfg.R);
      file.grid_n = j.value("grid_n", cfg.grid_n);
      if (j.contains("lambda") && !j["lambda"].is_null()) {
        file.has_lambda = true;
        file.lambda = j["lambda"].get<double>();
      }
      file.eps = j.value("eps", cfg.eps);
      file.local = j.value("local", cfg.local);
      file.delta = j.value("delta", cfg.delta);
      file.seed = j.value("seed", cfg.seed);
      file.out = j.value("out", cfg.out);
      // Flags set on the command line override the file.
      if (!oN->count()) cfg.N = file.N;
      if (!op->count()) cfg.p = file.p;
      if (!oq->count()) cfg.q = file.q;
      if (!oa->count()) cfg.a = file.a;
      if (!ob->count()) cfg.b = file.b;
      if (!oal->count()) cfg.alpha = file.alpha;
      if (!oR->count()) cfg.R = file.R;
      if (!on->count()) cfg.grid_n = file.grid_n;
      if (!ol->count()) {
        cfg.has_lambda = file.has_lambda;
        cfg.lambda = file.lambda;
      }
      if (!oe->count()) cfg.eps = file.eps;
      if (!olo->count()) cfg.local = file.local;
      if (!od->count()) cfg.delta = file.delta;
      if (!os->count()) cfg.seed = file.seed;
      if (!oo->count()) cfg.out = file.out;
    } catch (const std::exception& e) {
      std::cerr << "invalid config file: " << e.what() << "\n";
      return kExitUsage;
    }
  }
  if (ol->count()) cfg.has_lambda = true;

  std::string sub;
  for (const auto* s : app.get_subcommands()) sub = s->get_name();
  return run(sub, cfg);
}

}  // namespace klab::cli
