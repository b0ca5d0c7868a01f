#pragma once

// Command-line front end. run_cli parses arguments, dispatches to the
// library and writes to the given streams, so it can be driven in-process.
//
// Exit codes: 0 success, 1 reproduce mismatch, 2 invalid arguments,
// 3 numerical failure (non-convergence, no bracket, infeasible request).

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vsplan/error.hpp"
#include "vsplan/mc_oracle.hpp"
#include "vsplan/oc_single.hpp"
#include "vsplan/onesided.hpp"
#include "vsplan/reproduce.hpp"
#include "vsplan/twosided_double.hpp"
#include "vsplan/worked_examples.hpp"

namespace vsplan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

using Json = nlohmann::ordered_json;

enum class Output { Table, Csv, Json };

struct Request {
  std::string command;
  SpecLimits limits{1.0, 9.0};
  RiskPoint risk{0.01, 0.06, 0.1, 0.1};
  std::string procedure = "both";
  std::string output = "table";
  int grid = 21;
  std::uint64_t seed = 20240601;
  long replications = 100000;
  // Explicit plan for band and simulate commands.
  std::optional<int> n, n1, n2;
  std::optional<double> k, k1, k2, k3;
  // Band grid range and simulation point.
  double p_min = 1e-3, p_max = 0.2;
  std::optional<double> mu, sigma, p, s;
  // reproduce
  std::string example = "all";
  std::optional<double> tolerance;
  bool full_trace = false;
  bool quiet = false;
};

/// Fixed-point text with the given number of decimals.
inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

/// Significant-digit text (k values use 11).
inline std::string sig(double v, int digits = 11) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline std::string level(double v) {
  std::string s = fixed(v, 3);
  while (s.size() > 3 && s.back() == '0') s.pop_back();
  return s;
}

namespace detail {

inline std::vector<Procedure> procedures(const Request& r) {
  if (r.procedure == "both") return {Procedure::ML, Procedure::MVU};
  return {procedure_from_string(r.procedure)};
}

inline Output output_kind(const Request& r) {
  if (r.output == "csv") return Output::Csv;
  if (r.output == "json") return Output::Json;
  return Output::Table;
}

inline TwoSidedContext context(const Request& r) {
  TwoSidedContext ctx{r.limits, r.risk};
  ctx.validate();
  return ctx;
}

inline Json plan_json(const DoublePlan& p) {
  return Json{{"n1", p.n1}, {"k1", p.k1}, {"k2", p.k2}, {"n2", p.n2}, {"k3", p.k3}};
}

inline Json context_json(const TwoSidedContext& ctx) {
  return Json{{"lower", ctx.limits.lower}, {"upper", ctx.limits.upper}, {"p1", ctx.risk.p1},
              {"p2", ctx.risk.p2},         {"alpha", ctx.risk.alpha},   {"beta", ctx.risk.beta}};
}

inline std::string plan_text(const DoublePlan& p) {
  return "(" + std::to_string(p.n1) + ", " + fixed(p.k1, 6) + ", " + fixed(p.k2, 6) + "; " + std::to_string(p.n2) +
         ", " + fixed(p.k3, 6) + ")";
}

inline void progress(const Request& r, const std::string& msg) {
  if (!r.quiet) std::cerr << msg << '\n';
}

inline CalibrationOptions calibration_options(const Request& r) {
  CalibrationOptions o;
  if (!r.quiet) {
    o.on_step = [](int step, double a, double b) {
      std::cerr << "  step " << step << ": alpha**=" << fixed(a, 3) << " beta**=" << fixed(b, 3) << '\n';
    };
  }
  return o;
}

// The double plan named on the command line, if complete.
inline std::optional<DoublePlan> explicit_double(const Request& r, Procedure p) {
  if (!(r.n1 && r.k1 && r.k2 && r.n2 && r.k3)) {
    if (r.n1 || r.k1 || r.k2 || r.n2 || r.k3) throw DomainError("a double plan needs all of --n1 --k1 --k2 --n2 --k3");
    return std::nullopt;
  }
  DoublePlan plan{*r.n1, *r.k1, *r.k2, *r.n2, *r.k3, p};
  plan.validate();
  return plan;
}

inline Procedure single_procedure(const Request& r) {
  if (r.procedure == "both") throw DomainError("this command needs --procedure ml or mvu");
  return procedure_from_string(r.procedure);
}

}  // namespace detail

inline int cmd_single(const Request& r, std::ostream& out) {
  const TwoSidedContext ctx = detail::context(r);
  Json plans = Json::array();
  std::vector<SingleCalibration> results;
  for (Procedure p : detail::procedures(r)) {
    detail::progress(r, "single " + std::string(to_string(p)));
    results.push_back(calibrate_single(ctx, p, detail::calibration_options(r)));
  }
  const Output kind = detail::output_kind(r);
  if (kind == Output::Csv) out << "procedure,n,k,alpha_star,beta_star,min_oc_p1,max_oc_p2\n";
  for (const auto& c : results) {
    const std::string proc(to_string(c.plan.procedure));
    switch (kind) {
      case Output::Table:
        out << proc << ": n=" << c.plan.n << " k=" << sig(c.plan.k) << " alpha*=" << level(c.alpha_star)
            << " beta*=" << level(c.beta_star) << "  (min OC at p1 " << fixed(c.band.min_oc_p1, 10)
            << ", max OC at p2 " << fixed(c.band.max_oc_p2, 10) << ")\n";
        break;
      case Output::Csv:
        out << proc << ',' << c.plan.n << ',' << sig(c.plan.k) << ',' << level(c.alpha_star) << ','
            << level(c.beta_star) << ',' << sig(c.band.min_oc_p1, 12) << ',' << sig(c.band.max_oc_p2, 12) << '\n';
        break;
      case Output::Json:
        plans.push_back(Json{{"procedure", proc},
                             {"n", c.plan.n},
                             {"k", c.plan.k},
                             {"alpha_star", c.alpha_star},
                             {"beta_star", c.beta_star},
                             {"min_oc_p1", c.band.min_oc_p1},
                             {"max_oc_p2", c.band.max_oc_p2}});
        break;
    }
  }
  if (kind == Output::Json)
    out << Json{{"command", "single"}, {"context", detail::context_json(ctx)}, {"plans", plans}}.dump(2) << '\n';
  return kExitOk;
}

inline int cmd_double(const Request& r, std::ostream& out) {
  const TwoSidedContext ctx = detail::context(r);
  struct Result {
    Procedure procedure;
    DoubleCalibration cal;
    NMaxResult n_max;
  };
  std::vector<Result> results;
  for (Procedure p : detail::procedures(r)) {
    detail::progress(r, "double " + std::string(to_string(p)));
    Result res{p, calibrate_double(ctx, p, detail::calibration_options(r)), {}};
    detail::progress(r, "  N_max over the ASN band");
    res.n_max = n_max_double(res.cal.plan, ctx.limits);
    results.push_back(std::move(res));
  }
  const Output kind = detail::output_kind(r);
  if (kind == Output::Csv) {
    out << "procedure,alpha_ss,beta_ss,n1,k1,k2,n2,k3,n_max_onesided,min_oc_p1,max_oc_p2,accepted\n";
    for (const auto& res : results) {
      const auto rows = r.full_trace ? res.cal.trace.rows : res.cal.trace.table();
      for (const auto& row : rows) {
        out << to_string(res.procedure) << ',' << level(row.alpha_ss) << ',' << level(row.beta_ss) << ','
            << row.plan.n1 << ',' << sig(row.plan.k1) << ',' << sig(row.plan.k2) << ',' << row.plan.n2 << ','
            << sig(row.plan.k3) << ',' << sig(row.n_max_onesided, 10) << ',' << sig(row.min_oc_p1, 12) << ','
            << sig(row.max_oc_p2, 12) << ',' << (row.accepted ? 1 : 0) << '\n';
      }
    }
    return kExitOk;
  }
  if (kind == Output::Json) {
    Json procs = Json::array();
    for (const auto& res : results) {
      Json rows = Json::array();
      for (const auto& row : res.cal.trace.rows) {
        rows.push_back(Json{{"alpha_ss", row.alpha_ss},
                            {"beta_ss", row.beta_ss},
                            {"plan", detail::plan_json(row.plan)},
                            {"n_max_onesided", row.n_max_onesided},
                            {"min_oc_p1", row.min_oc_p1},
                            {"max_oc_p2", row.max_oc_p2},
                            {"accepted", row.accepted}});
      }
      procs.push_back(Json{{"procedure", std::string(to_string(res.procedure))},
                           {"alpha_star", res.cal.single.alpha_star},
                           {"beta_star", res.cal.single.beta_star},
                           {"trace", rows},
                           {"plan", detail::plan_json(res.cal.plan)},
                           {"n_max", Json{{"value", res.n_max.value},
                                          {"p", res.n_max.p},
                                          {"sigma", res.n_max.sigma},
                                          {"mu", res.n_max.mu}}}});
    }
    out << Json{{"command", "double"}, {"context", detail::context_json(ctx)}, {"procedures", procs}}.dump(2) << '\n';
    return kExitOk;
  }
  for (const auto& res : results) {
    out << "procedure " << to_string(res.procedure) << "  (alpha*, beta*) = (" << level(res.cal.single.alpha_star)
        << ", " << level(res.cal.single.beta_star) << ")\n";
    out << "alpha**  beta**  plan                                        N_max(phi*)  min OC(p1)    max OC(p2)\n";
    const auto rows = r.full_trace ? res.cal.trace.rows : res.cal.trace.table();
    for (const auto& row : rows) {
      std::string plan = detail::plan_text(row.plan);
      plan.resize(std::max<std::size_t>(plan.size(), 42), ' ');
      out << fixed(row.alpha_ss, 3) << "    " << fixed(row.beta_ss, 3) << "   " << plan << "  "
          << fixed(row.n_max_onesided, 5) << "     " << fixed(row.min_oc_p1, 10) << "  " << fixed(row.max_oc_p2, 10)
          << '\n';
    }
    out << "final " << detail::plan_text(res.cal.plan) << "  N_max = " << fixed(res.n_max.value, 6) << " at p = "
        << sig(res.n_max.p, 6) << ", sigma = " << sig(res.n_max.sigma, 6) << "\n\n";
  }
  if (results.size() == 2) {
    const double ml = results[0].n_max.value, mvu = results[1].n_max.value;
    out << "N_max mvu " << fixed(mvu, 6) << (mvu < ml ? " < " : " >= ") << "ml " << fixed(ml, 6) << "  (difference "
        << fixed(ml - mvu, 6) << ")\n";
  }
  return kExitOk;
}

inline int cmd_band(const Request& r, std::ostream& out, bool asn) {
  const TwoSidedContext ctx = detail::context(r);
  const Procedure proc = detail::single_procedure(r);
  std::optional<DoublePlan> plan = detail::explicit_double(r, proc);
  if (!plan) {
    detail::progress(r, "no plan given; calibrating");
    plan = calibrate_double(ctx, proc, detail::calibration_options(r)).plan;
  }
  if (r.grid < 2) throw DomainError("--grid must be at least 2");
  if (!(r.p_min > 0.0 && r.p_min < r.p_max && r.p_max < 1.0)) throw DomainError("need 0 < --p-min < --p-max < 1");
  const Output kind = detail::output_kind(r);
  Json rows = Json::array();
  if (kind != Output::Json) out << "p,s,sigma,mu,value\n";
  const double lp = std::log(r.p_min), hp = std::log(r.p_max);
  for (int i = 0; i < r.grid; ++i) {
    const double p = std::exp(lp + (hp - lp) * i / (r.grid - 1));
    for (int j = 0; j < r.grid; ++j) {
      const double s = kBandEpsilon + (1.0 - kBandEpsilon) * j / (r.grid - 1);
      const BandPoint bp = band_point(p, s, ctx.limits);
      const double v = asn ? asn_double(*plan, bp.mu, bp.sigma, ctx.limits) : oc_double(*plan, bp.mu, bp.sigma, ctx.limits);
      if (kind == Output::Json) {
        rows.push_back(Json{{"p", p}, {"s", s}, {"sigma", bp.sigma}, {"mu", bp.mu}, {"value", v}});
      } else {
        out << sig(p, 12) << ',' << sig(s, 12) << ',' << sig(bp.sigma, 12) << ',' << sig(bp.mu, 12) << ','
            << sig(v, 12) << '\n';
      }
    }
  }
  if (kind == Output::Json) {
    out << Json{{"command", asn ? "asn-band" : "oc-band"},
                {"context", detail::context_json(ctx)},
                {"procedure", std::string(to_string(proc))},
                {"plan", detail::plan_json(*plan)},
                {"rows", rows}}
               .dump(2)
        << '\n';
  }
  return kExitOk;
}

inline int cmd_simulate(const Request& r, std::ostream& out) {
  const TwoSidedContext ctx = detail::context(r);
  const Procedure proc = detail::single_procedure(r);
  double mu = 0.0, sigma = 0.0;
  if (r.mu && r.sigma) {
    mu = *r.mu;
    sigma = *r.sigma;
  } else if (r.p && r.s) {
    const BandPoint bp = band_point(*r.p, *r.s, ctx.limits);
    mu = bp.mu;
    sigma = bp.sigma;
  } else {
    throw DomainError("simulate needs --mu and --sigma, or --p and --s");
  }
  const mc::SimConfig cfg{r.replications, r.seed, mu, sigma};
  double exact_oc = 0.0, exact_asn = 0.0;
  mc::SimResult sim;
  if (const auto plan = detail::explicit_double(r, proc)) {
    sim = mc::simulate_double(*plan, cfg, ctx.limits);
    exact_oc = oc_double(*plan, mu, sigma, ctx.limits);
    exact_asn = asn_double(*plan, mu, sigma, ctx.limits);
  } else if (r.n && r.k) {
    const SinglePlan plan{*r.n, *r.k, proc};
    sim = mc::simulate_single(plan, cfg, ctx.limits);
    exact_oc = oc_single(plan, mu, sigma, ctx.limits);
    exact_asn = plan.n;
  } else {
    throw DomainError("simulate needs a plan: --n --k, or --n1 --k1 --k2 --n2 --k3");
  }
  const double z_oc = sim.std_error_accept > 0.0 ? (sim.accept_rate - exact_oc) / sim.std_error_accept : 0.0;
  const double z_asn = sim.std_error_asn > 0.0 ? (sim.mean_sample_number - exact_asn) / sim.std_error_asn : 0.0;
  switch (detail::output_kind(r)) {
    case Output::Table:
      out << "mu=" << sig(mu, 12) << " sigma=" << sig(sigma, 12) << " replications=" << sim.replications
          << " seed=" << r.seed << '\n'
          << "accept rate " << fixed(sim.accept_rate, 6) << " (se " << sig(sim.std_error_accept, 3) << ")  exact OC "
          << fixed(exact_oc, 6) << "  z " << fixed(z_oc, 2) << '\n'
          << "mean sample number " << fixed(sim.mean_sample_number, 4) << " (se " << sig(sim.std_error_asn, 3)
          << ")  exact ASN " << fixed(exact_asn, 4) << "  z " << fixed(z_asn, 2) << '\n';
      break;
    case Output::Csv:
      out << "mu,sigma,replications,accept_rate,se_accept,exact_oc,mean_sample_number,se_asn,exact_asn\n"
          << sig(mu, 12) << ',' << sig(sigma, 12) << ',' << sim.replications << ',' << sig(sim.accept_rate, 12) << ','
          << sig(sim.std_error_accept, 6) << ',' << sig(exact_oc, 12) << ',' << sig(sim.mean_sample_number, 12)
          << ',' << sig(sim.std_error_asn, 6) << ',' << sig(exact_asn, 12) << '\n';
      break;
    case Output::Json:
      out << Json{{"command", "simulate"},
                  {"mu", mu},
                  {"sigma", sigma},
                  {"replications", sim.replications},
                  {"seed", r.seed},
                  {"accept_rate", sim.accept_rate},
                  {"std_error_accept", sim.std_error_accept},
                  {"exact_oc", exact_oc},
                  {"mean_sample_number", sim.mean_sample_number},
                  {"std_error_asn", sim.std_error_asn},
                  {"exact_asn", exact_asn}}
                 .dump(2)
          << '\n';
      break;
  }
  return kExitOk;
}

inline int cmd_reproduce(const Request& r, std::ostream& out) {
  worked::Tolerances tol;
  if (r.tolerance) {
    if (!(*r.tolerance > 0.0)) throw DomainError("--tolerance must be positive");
    tol = {*r.tolerance, *r.tolerance, *r.tolerance, *r.tolerance, *r.tolerance};
  }
  std::vector<worked::Example> examples;
  if (r.example == "1" || r.example == "all") examples.push_back(worked::example1());
  if (r.example == "2" || r.example == "all") examples.push_back(worked::example2());
  if (examples.empty()) throw DomainError("--example must be 1, 2 or all");
  const auto procs = detail::procedures(r);
  std::vector<worked::Check> checks;
  for (const auto& ex : examples) {
    worked::Progress prog;
    if (!r.quiet) prog = [](const std::string& m) { std::cerr << m << '\n'; };
    const auto run = worked::run_example(ex, procs, {}, {}, prog);
    const auto c = worked::compare(ex, run, tol);
    checks.insert(checks.end(), c.begin(), c.end());
  }
  const Output kind = detail::output_kind(r);
  Json arr = Json::array();
  if (kind == Output::Csv) out << "status,example,check,computed,expected,tolerance,gating\n";
  for (const auto& c : checks) {
    const std::string status = c.pass ? "PASS" : (c.gating ? "FAIL" : "INFO");
    if (kind == Output::Table) {
      out << status << "  " << c.example << "  " << c.name << "  computed " << sig(c.computed, 11) << "  expected "
          << sig(c.expected, 11) << "  tol " << sig(c.tolerance, 3) << '\n';
    } else if (kind == Output::Csv) {
      out << status << ',' << c.example << ',' << c.name << ',' << sig(c.computed, 12) << ',' << sig(c.expected, 12)
          << ',' << sig(c.tolerance, 3) << ',' << (c.gating ? 1 : 0) << '\n';
    } else {
      arr.push_back(Json{{"status", status},
                         {"example", c.example},
                         {"check", c.name},
                         {"computed", c.computed},
                         {"expected", c.expected},
                         {"tolerance", c.tolerance},
                         {"gating", c.gating}});
    }
  }
  const bool ok = worked::all_pass(checks);
  if (kind == Output::Json) out << Json{{"command", "reproduce"}, {"pass", ok}, {"checks", arr}}.dump(2) << '\n';
  if (kind == Output::Table) out << (ok ? "all gating checks passed\n" : "some gating checks failed\n");
  return ok ? kExitOk : kExitMismatch;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Request r;
  CLI::App app{"Variables sampling plans: single and ASN-minimax double plans for two-sided limits", "vsplan"};
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--lower", r.limits.lower, "lower specification limit L")->envname("VSPLAN_LOWER");
  app.add_option("--upper", r.limits.upper, "upper specification limit U")->envname("VSPLAN_UPPER");
  app.add_option("--p1", r.risk.p1, "acceptable quality level")->envname("VSPLAN_P1");
  app.add_option("--p2", r.risk.p2, "rejectable quality level")->envname("VSPLAN_P2");
  app.add_option("--alpha", r.risk.alpha, "producer risk")->envname("VSPLAN_ALPHA");
  app.add_option("--beta", r.risk.beta, "consumer risk")->envname("VSPLAN_BETA");
  app.add_option("--procedure", r.procedure, "ml, mvu or both")
      ->check(CLI::IsMember({"ml", "mvu", "both"}))
      ->envname("VSPLAN_PROCEDURE");
  app.add_option("--output", r.output, "table, csv or json")
      ->check(CLI::IsMember({"table", "csv", "json"}))
      ->envname("VSPLAN_OUTPUT");
  app.add_option("--grid", r.grid, "band grid points per axis")->envname("VSPLAN_GRID");
  app.add_option("--seed", r.seed, "simulation seed")->envname("VSPLAN_SEED");
  app.add_option("--replications", r.replications, "simulation replications")->envname("VSPLAN_REPLICATIONS");
  app.add_flag("--quiet,-q", r.quiet, "no progress on stderr");

  auto* single = app.add_subcommand("single", "single plan with its calibrated levels (alpha*, beta*)");
  auto* dbl = app.add_subcommand("double", "ASN-minimax double plan with its calibration trace");
  dbl->add_flag("--full-trace", r.full_trace, "print every calibration step");
  auto* oc_band = app.add_subcommand("oc-band", "OC over the (p, sigma) band as CSV");
  auto* asn_band = app.add_subcommand("asn-band", "ASN over the (p, sigma) band as CSV");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo check of a plan at one process state");
  auto* reproduce = app.add_subcommand("reproduce", "recompute the worked examples and compare");
  reproduce->add_option("--example", r.example, "1, 2 or all")->check(CLI::IsMember({"1", "2", "all"}));
  reproduce->add_option("--tolerance", r.tolerance, "override every comparison tolerance");

  auto plan_options = [&](CLI::App* sub) {
    sub->add_option("--n1", r.n1, "first sample size");
    sub->add_option("--k1", r.k1, "first-stage acceptance value");
    sub->add_option("--k2", r.k2, "first-stage rejection value");
    sub->add_option("--n2", r.n2, "second sample size");
    sub->add_option("--k3", r.k3, "second-stage acceptance value");
  };
  for (auto* sub : {oc_band, asn_band, simulate}) plan_options(sub);
  for (auto* sub : {oc_band, asn_band}) {
    sub->add_option("--p-min", r.p_min, "smallest p on the band grid");
    sub->add_option("--p-max", r.p_max, "largest p on the band grid");
  }
  simulate->add_option("--n", r.n, "single plan sample size");
  simulate->add_option("--k", r.k, "single plan acceptance value");
  simulate->add_option("--mu", r.mu, "process mean");
  simulate->add_option("--sigma", r.sigma, "process standard deviation");
  simulate->add_option("--p", r.p, "fraction defective of the band point");
  simulate->add_option("--s", r.s, "sigma / sigma0(p) of the band point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*single) return cmd_single(r, out);
    if (*dbl) return cmd_double(r, out);
    if (*oc_band) return cmd_band(r, out, false);
    if (*asn_band) return cmd_band(r, out, true);
    if (*simulate) return cmd_simulate(r, out);
    if (*reproduce) return cmd_reproduce(r, out);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConvergenceError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const NoBracketError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}

}  // namespace vsplan::cli
