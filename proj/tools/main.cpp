#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sphqmc/experiments.hpp"
#include "sphqmc/metrics.hpp"
#include "sphqmc/samplers.hpp"
#include "sphqmc/spectral.hpp"

namespace {

using nlohmann::json;

struct SampleArgs {
  std::string kind = "iid-uniform";
  std::size_t n = 1;
  std::uint64_t seed = 0;
  std::size_t replicas = 1;
  std::string out;
};

struct ScoreArgs {
  std::string in;
  std::string metric = "wce";
  double s = 2.0;
  double tol = 1e-8;
  double t = 1.0;
  std::size_t caps = 4096;
  std::string route = "legendre";
  std::string mode = "auto";
  bool bernstein = false;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct BoundsArgs {
  std::size_t n = 1000;
  double eta = -1.0;
  double eps = -1.0;
  double delta = -1.0;
};

int run_sample(const SampleArgs& a) {
  const sphqmc::SamplerKind kind = sphqmc::sampler_kind_from_string(a.kind);
  std::filesystem::create_directories(a.out);
  json manifest;
  manifest["kind"] = a.kind;
  manifest["n"] = a.n;
  manifest["seed"] = a.seed;
  manifest["stream_ids"] = json::array();
  manifest["files"] = json::array();
  for (std::size_t r = 0; r < a.replicas; ++r) {
    sphqmc::SamplerSpec spec{kind, a.n, a.seed, r};
    const sphqmc::Configuration c = sphqmc::sample(spec);
    char name[64];
    std::snprintf(name, sizeof(name), "replica_%06zu.csv", r);
    sphqmc::write_csv_file(c, a.out + "/" + name);
    manifest["stream_ids"].push_back(r);
    manifest["files"].push_back(name);
  }
  std::ofstream mf(a.out + "/manifest.json");
  if (!mf) throw std::runtime_error("cannot write manifest");
  mf << manifest.dump(2) << "\n";
  std::cout << "wrote " << a.replicas << " replica(s) to " << a.out << "\n";
  return 0;
}

int run_score(const ScoreArgs& a) {
  const sphqmc::Configuration c = sphqmc::read_csv_file(a.in);
  json out;
  out["metric"] = a.metric;
  json params;
  params["n"] = c.n();
  double value = 0.0, tail = 0.0;
  if (a.metric == "wce") {
    params["s"] = a.s;
    params["tol"] = a.tol;
    params["route"] = a.route;
    if (a.route == "legendre") {
      sphqmc::WceOptions opts;
      opts.tol = a.tol;
      opts.bernstein_tail = a.bernstein;
      opts.threads = a.threads;
      const auto r = sphqmc::wce_legendre(c, sphqmc::SmoothnessParam(a.s), opts);
      value = r.value;
      tail = r.tail_bound;
      params["truncation_l"] = r.truncation_l;
    } else if (a.route == "heat") {
      sphqmc::HeatQuadOptions opts;
      opts.tol = a.tol;
      opts.threads = a.threads;
      const auto r =
          sphqmc::wce_heat_kernel(c, sphqmc::SmoothnessParam(a.s), opts);
      value = r.value;
      tail = r.tail_bound;
      params["truncation_l"] = r.truncation_l;
    } else if (a.route == "distance") {
      const auto r = sphqmc::wce_distance_s32(c);
      value = r.result.value;
      tail = r.result.tail_bound;
      params["s"] = 1.5;
      params["kappa"] = r.kappa;
      params["functional"] = r.functional;
    } else {
      throw CLI::ValidationError("--route must be legendre, heat or distance");
    }
  } else if (a.metric == "gt") {
    params["t"] = a.t;
    params["tol"] = a.tol;
    const auto r = sphqmc::g_of_t(c, a.t, a.tol);
    value = r.value;
    tail = r.tail_bound;
    params["truncation_l"] = r.truncation_l;
  } else if (a.metric == "capL2") {
    params["caps"] = a.caps;
    params["seed"] = a.seed;
    sphqmc::RngStream rng(a.seed, 0);
    const auto r = sphqmc::cap_discrepancy_l2(c, a.caps, rng);
    value = r.estimate;
    tail = r.std_error;
  } else if (a.metric == "capLinf") {
    const bool exact = (a.mode == "exact") ||
                       (a.mode == "auto" && c.n() <= 300);
    params["mode"] = exact ? "exact" : "randomized";
    if (exact) {
      value = sphqmc::cap_discrepancy_linf(
          c, sphqmc::CapLinfMode::exact_small_n, nullptr, a.threads);
    } else {
      sphqmc::RngStream rng(a.seed, 1);
      value = sphqmc::cap_discrepancy_linf(
          c, sphqmc::CapLinfMode::randomized, &rng, a.threads);
    }
  } else if (a.metric == "gensum") {
    params["s"] = a.s;
    value = sphqmc::generalized_sum(c, sphqmc::SmoothnessParam(a.s));
  } else if (a.metric == "energy") {
    value = sphqmc::log_energy(c);
  } else {
    throw CLI::ValidationError("unknown --metric " + a.metric);
  }
  out["value"] = value;
  out["tail_bound"] = tail;
  out["params"] = params;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_bounds(const BoundsArgs& a) {
  json out;
  out["n"] = a.n;
  if (a.eta >= 0.0) {
    const auto rep = sphqmc::explicit_confidence(a.n, a.eta);
    out["eta"] = rep.eta;
    out["r_squared"] = rep.r_squared;
    out["eps"] = rep.eps;
    out["numerator"] = rep.numerator;
    out["wce_bound"] = rep.wce_bound;
    out["failure_prob"] = rep.failure_prob;
    out["failure_prob_variant"] = rep.failure_prob_variant;
  } else if (a.eps > 0.0 && a.delta > 0.0) {
    const auto params = sphqmc::BoundParams::from_delta(a.n, a.eps, a.delta);
    const double lam = sphqmc::optimal_lambda(params);
    out["eps"] = a.eps;
    out["delta"] = a.delta;
    out["r_squared"] = params.r_squared();
    out["eta"] = params.eta();
    out["lambda_star"] = lam;
    out["f_lambda_star"] = sphqmc::f_lambda(lam, a.eps, params.c0);
    out["tail_bound"] = sphqmc::concentration_tail(params);
  } else {
    throw CLI::ValidationError(
        "bounds: pass either --eta, or both --eps and --delta");
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sphqmc: spherical-ensemble sampling, Sobolev worst-case integration "
      "errors and concentration bound calculators",
      "sphqmc"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads,
                 "Worker thread cap (0 = hardware concurrency)");

  SampleArgs sa;
  auto* sample_cmd =
      app.add_subcommand("sample", "Draw point-set replicas and write CSVs");
  sample_cmd
      ->add_option("--kind", sa.kind,
                   "Sampler: spherical-eig, spherical-dpp, iid-uniform, "
                   "equal-area-jitter, fibonacci")
      ->required();
  sample_cmd->add_option("--n", sa.n, "Points per configuration")->required();
  sample_cmd->add_option("--seed", sa.seed, "Base seed");
  sample_cmd->add_option("--replicas", sa.replicas, "Number of replicas");
  sample_cmd->add_option("--out", sa.out, "Output directory")->required();

  ScoreArgs sc;
  auto* score_cmd =
      app.add_subcommand("score", "Evaluate a metric on a configuration CSV");
  score_cmd->add_option("--in", sc.in, "Configuration CSV file")->required();
  score_cmd->add_option("--metric", sc.metric,
                        "wce, gt, capL2, capLinf, gensum or energy");
  score_cmd->add_option("--s", sc.s, "Smoothness parameter (wce, gensum)");
  score_cmd->add_option("--tol", sc.tol, "Absolute tolerance on wce^2 / g(t)");
  score_cmd->add_option("--t", sc.t, "Heat time (gt)");
  score_cmd->add_option("--caps", sc.caps, "Monte-Carlo cap count (capL2)");
  score_cmd->add_option("--route", sc.route,
                        "wce route: legendre, heat or distance");
  score_cmd->add_option("--mode", sc.mode,
                        "capLinf mode: auto, exact or randomized");
  score_cmd->add_flag("--bernstein", sc.bernstein,
                      "Sharper per-pair tail bounds (wce legendre route)");
  score_cmd->add_option("--seed", sc.seed, "Seed for randomized metrics");

  BoundsArgs ba;
  auto* bounds_cmd = app.add_subcommand(
      "bounds", "Evaluate the concentration/confidence bound calculators");
  bounds_cmd->add_option("--n", ba.n, "Point count N")->required();
  bounds_cmd->add_option("--eta", ba.eta,
                         "Explicit-confidence parameter (8 pi R^2 = 1+eta)");
  bounds_cmd->add_option("--eps", ba.eps, "Sobolev offset (s = 2 + eps)");
  bounds_cmd->add_option("--delta", ba.delta, "Deviation threshold");

  std::string plan_path;
  auto* exp_cmd =
      app.add_subcommand("experiment", "Run a batch experiment plan");
  exp_cmd->add_option("--plan", plan_path, "Plan JSON file")->required();

  std::string report_in, report_tsv;
  double report_eta = 3.0;
  auto* report_cmd = app.add_subcommand(
      "report", "Summarize a results CSV into a table and plot-ready TSV");
  report_cmd->add_option("--in", report_in, "results.csv from a batch run")
      ->required();
  report_cmd->add_option("--tsv", report_tsv, "Write TSV to this file");
  report_cmd->add_option("--eta", report_eta, "Bound curve parameter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error:validation: " << e.what() << "\n";
    std::cerr << app.help() << "\n";
    return 1;
  }

  try {
    if (*sample_cmd) {
      sc.threads = threads;
      return run_sample(sa);
    }
    if (*score_cmd) {
      sc.threads = threads;
      return run_score(sc);
    }
    if (*bounds_cmd) return run_bounds(ba);
    if (*exp_cmd) {
      auto plan = sphqmc::ExperimentPlan::from_json_file(plan_path);
      if (threads > 0) plan.threads = threads;
      if (!plan.output_dir.empty()) {
        std::filesystem::create_directories(plan.output_dir);
      }
      const auto records = sphqmc::run_batch(plan);
      const auto cells = sphqmc::summarize(records);
      std::cout << sphqmc::render_table(cells);
      if (!plan.output_dir.empty()) {
        std::ofstream sf(plan.output_dir + "/summary.json");
        json js = json::array();
        for (const auto& c : cells) {
          js.push_back({{"kind", c.kind},
                        {"n", c.n},
                        {"metric", c.metric},
                        {"s", c.s},
                        {"count", c.count},
                        {"mean", c.mean},
                        {"se", c.se},
                        {"q50", c.q50},
                        {"q90", c.q90},
                        {"q99", c.q99}});
        }
        sf << js.dump(2) << "\n";
      }
      return 0;
    }
    if (*report_cmd) {
      const auto records = sphqmc::load_records_file(report_in);
      const auto cells = sphqmc::summarize(records);
      std::cout << sphqmc::render_table(cells);
      if (!report_tsv.empty()) {
        std::ofstream tf(report_tsv);
        if (!tf) throw std::runtime_error("cannot write " + report_tsv);
        tf << sphqmc::render_tsv(cells, report_eta);
      } else {
        std::cout << "\n" << sphqmc::render_tsv(cells, report_eta);
      }
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error:validation: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error:validation: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error:validation: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error:runtime: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
