#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "dnaplan/diagnostics.hpp"
#include "dnaplan/error.hpp"
#include "dnaplan/flow_sim.hpp"
#include "dnaplan/graph.hpp"
#include "dnaplan/io.hpp"
#include "dnaplan/oracle.hpp"
#include "dnaplan/predictor.hpp"

namespace dnaplan::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

struct Manifest {
  std::string command;
  Json inputs = Json::object();
  Json outputs = Json::array();
  Json config = Json::object();
  std::optional<std::uint64_t> seed;
};

void write_manifest(const fs::path& primary, const std::vector<std::string>& args, const Manifest& m) {
  Json j;
  j["tool"] = "dnaplan";
  j["version"] = kToolVersion;
  j["command"] = m.command;
  j["args"] = args;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["config"] = m.config;
  if (m.seed) {
    j["seed"] = *m.seed;
  } else {
    j["seed"] = nullptr;
  }
  io::write_file(fs::path(primary.string() + ".manifest.json"), io::dump_stable(j));
}

void emit(const fs::path& path, const std::string& contents, Manifest& m) {
  io::write_file(path, contents);
  m.outputs.push_back(path.string());
}

std::vector<std::size_t> parse_restrict(const std::string& value, std::size_t n, Json& cfg) {
  const auto colon = value.find(':');
  if (colon == std::string::npos) {
    throw DomainError("--restrict expects stride:S or idx:i,j,...");
  }
  const std::string kind = value.substr(0, colon);
  const std::string rest = value.substr(colon + 1);
  try {
    if (kind == "stride") {
      const long s = std::stol(rest);
      if (s < 1) throw DomainError("restrict stride must be >= 1");
      cfg["restrict"] = Json{{"kind", "stride"}, {"stride", s}};
      return stride_indices(n, static_cast<std::size_t>(s));
    }
    if (kind == "idx") {
      std::vector<std::size_t> idx;
      std::stringstream ss(rest);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        const long v = std::stol(tok);
        if (v < 0) throw DomainError("restrict index must be >= 0");
        idx.push_back(static_cast<std::size_t>(v));
      }
      std::sort(idx.begin(), idx.end());
      idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
      cfg["restrict"] = Json{{"kind", "idx"}, {"indices", idx}};
      return idx;
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const DomainError*>(&e)) throw;
    throw DomainError("malformed --restrict value '" + value + "'");
  }
  throw DomainError("unknown --restrict kind '" + kind + "'");
}

std::vector<double> read_embedding(const fs::path& p) {
  const Json j = io::read_json(p);
  const Json& arr = j.is_object() ? j.at("embedding") : j;
  if (!arr.is_array()) {
    throw InvalidInput("embedding file must hold an array or {\"embedding\": [...]}");
  }
  std::vector<double> e;
  for (const auto& x : arr) {
    if (!x.is_number()) throw InvalidInput("embedding must contain only numbers");
    e.push_back(x.get<double>());
  }
  return e;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Plan diffusion sampling schedules from per-timestep reconstruction-error profiles", "dnaplan"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Manifest m;
  std::function<void()> action;

  // sim-extract
  std::string sx_scenario, sx_out, sx_scenario_out;
  std::size_t sx_points = 100, sx_dim = 8, sx_mc = 0;
  bool sx_zero = false;
  double sx_rate = 3.0;
  std::uint64_t sx_seed = 0;
  auto* sim = app.add_subcommand("sim-extract", "Measure a DNA profile inside the linear-flow simulator");
  sim->add_option("--scenario", sx_scenario, "Scenario JSON (default: generated from --rate/--dim/--seed)");
  sim->add_option("--out", sx_out, "Output DNA JSON")->required();
  sim->add_option("--scenario-out", sx_scenario_out, "Also write the scenario used");
  sim->add_option("--points", sx_points, "Grid points")->check(CLI::Range(2, 100000));
  sim->add_flag("--include-zero", sx_zero, "Grid includes t = 0 (otherwise t_i = i/N, i = 1..N)");
  sim->add_option("--dim", sx_dim, "Generated scenario dimension")->check(CLI::PositiveNumber);
  sim->add_option("--rate", sx_rate, "Generated error profile: e(t)^2 = expm1(rate t) / expm1(rate)");
  sim->add_option("--seed", sx_seed, "Seed for generated scenario and Monte-Carlo draws");
  sim->add_option("--mc-draws", sx_mc, "Use the Monte-Carlo expectation with this many draws");
  sim->callback([&] {
    action = [&] {
      m.command = "sim-extract";
      const TimeGrid grid = TimeGrid::uniform(sx_points, sx_zero);
      flow::SimScenario s;
      if (!sx_scenario.empty()) {
        s = io::scenario_from_json(io::read_json(sx_scenario));
        m.inputs["scenario"] = sx_scenario;
      } else {
        if (!(sx_rate != 0.0) || !std::isfinite(sx_rate)) throw DomainError("--rate must be finite and nonzero");
        std::vector<double> e(grid.size());
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = std::sqrt(std::expm1(sx_rate * grid[i]) / std::expm1(sx_rate));
        s = flow::make_scenario(sx_dim, grid, e, sx_seed);
      }
      m.seed = sx_seed;
      m.config = Json{{"points", sx_points}, {"include_zero", sx_zero}, {"dim", sx_dim}, {"rate", sx_rate},
                      {"mc_draws", sx_mc}, {"scenario", sx_scenario.empty() ? "generated" : "file"}};
      DnaProfile dna = sx_mc > 0 ? flow::extract_dna_monte_carlo(s, grid, sx_mc, sx_seed) : flow::extract_dna(s, grid);
      emit(sx_out, io::dump_stable(io::dna_to_json(dna)), m);
      if (!sx_scenario_out.empty()) emit(sx_scenario_out, io::dump_stable(io::scenario_to_json(s)), m);
      write_manifest(sx_out, args, m);
    };
  });

  // plan / oracle share pin flags
  std::string pl_dna, pl_out, pl_restrict, pl_rho_mode = "replan";
  std::optional<std::size_t> pl_steps, pl_max_steps;
  bool pl_adaptive = false, pin_start = true, pin_end = true;
  double pl_rho = 0.99;
  auto* plan = app.add_subcommand("plan", "Plan a minimum-cost schedule on a DNA profile");
  plan->add_option("--dna", pl_dna, "DNA JSON or CSV")->required();
  plan->add_option("--out", pl_out, "Output schedule JSON")->required();
  auto* steps_opt = plan->add_option("--steps", pl_steps, "Exact number of solver steps")->check(CLI::PositiveNumber);
  auto* adaptive_flag = plan->add_flag("--adaptive", pl_adaptive, "Adaptive length via the explained gain ratio");
  plan->add_option("--rho", pl_rho, "Explained gain ratio threshold, in (0, 1]");
  plan->add_option("--max-steps", pl_max_steps, "Largest step budget for --adaptive")->check(CLI::PositiveNumber);
  plan->add_option("--rho-mode", pl_rho_mode, "replan (best n-step plan) or prefix (prefix of the max-steps plan)")
      ->check(CLI::IsMember({"replan", "prefix"}));
  plan->add_flag("--pin-start,!--no-pin-start", pin_start, "Start at the largest timestep (default on)");
  plan->add_flag("--pin-end,!--no-pin-end", pin_end, "End at the smallest timestep (default on)");
  plan->add_option("--restrict", pl_restrict, "Plan on a node subset: stride:S or idx:i,j,...");
  steps_opt->excludes(adaptive_flag);
  plan->callback([&] {
    action = [&] {
      m.command = "plan";
      m.inputs["dna"] = pl_dna;
      const DnaProfile dna = io::load_dna(pl_dna);
      PlannerGraph g = build_graph(dna, pin_start, pin_end);
      m.config = Json{{"pin_start", pin_start}, {"pin_end", pin_end}};
      if (!pl_restrict.empty()) {
        const auto idx = parse_restrict(pl_restrict, dna.size(), m.config);
        g = restrict_nodes(g, idx);
      }
      Json result;
      if (pl_adaptive) {
        if (!pl_max_steps) throw DomainError("--adaptive requires --max-steps");
        const RhoMode mode = pl_rho_mode == "prefix" ? RhoMode::prefix : RhoMode::replan;
        m.config["mode"] = "adaptive";
        m.config["rho"] = pl_rho;
        m.config["max_steps"] = *pl_max_steps;
        m.config["rho_mode"] = pl_rho_mode;
        result = io::adaptive_to_json(plan_adaptive(g, pl_rho, *pl_max_steps, mode), dna.meta);
      } else if (pl_steps) {
        m.config["mode"] = "fixed";
        m.config["steps"] = *pl_steps;
        result = io::schedule_to_json(plan_fixed(g, *pl_steps), dna.meta);
      } else {
        m.config["mode"] = "unconstrained";
        result = io::schedule_to_json(plan_unconstrained(g), dna.meta);
      }
      emit(pl_out, io::dump_stable(result), m);
      write_manifest(pl_out, args, m);
    };
  });

  std::string or_dna, or_out;
  std::optional<std::size_t> or_steps;
  bool or_pin_start = true, or_pin_end = true;
  auto* orc = app.add_subcommand("oracle", "Brute-force the optimal schedule on a small grid (<= 16 points)");
  orc->add_option("--dna", or_dna, "DNA JSON or CSV")->required();
  orc->add_option("--out", or_out, "Output schedule JSON")->required();
  orc->add_option("--steps", or_steps, "Exact number of solver steps")->check(CLI::PositiveNumber);
  orc->add_flag("--pin-start,!--no-pin-start", or_pin_start, "Start at the largest timestep (default on)");
  orc->add_flag("--pin-end,!--no-pin-end", or_pin_end, "End at the smallest timestep (default on)");
  orc->callback([&] {
    action = [&] {
      m.command = "oracle";
      m.inputs["dna"] = or_dna;
      const DnaProfile dna = io::load_dna(or_dna);
      m.config = Json{{"pin_start", or_pin_start}, {"pin_end", or_pin_end}};
      m.config["steps"] = or_steps ? Json(*or_steps) : Json(nullptr);
      const auto r = oracle::enumerate_best(dna, or_steps, or_pin_start, or_pin_end);
      emit(or_out, io::dump_stable(io::oracle_to_json(r, dna)), m);
      write_manifest(or_out, args, m);
    };
  });

  std::string dg_dna, dg_out, dg_csv;
  diagnostics::Thresholds th;
  auto* diag = app.add_subcommand("diagnose", "Gain decomposition and stability classification");
  diag->add_option("--dna", dg_dna, "DNA JSON or CSV")->required();
  diag->add_option("--out", dg_out, "Output report JSON")->required();
  diag->add_option("--gains-csv", dg_csv, "Also write the gain series (t_mid,gain)");
  diag->add_option("--tau-neg", th.tau_neg, "Normalized negative-gain threshold at the first step");
  diag->add_option("--t-late", th.t_late, "Late window boundary");
  diag->add_option("--n-osc", th.n_osc, "Sign changes in the late window for late-oscillatory");
  diag->add_option("--kappa", th.kappa, "Late/early mean gain ratio for non-convergent");
  diag->callback([&] {
    action = [&] {
      m.command = "diagnose";
      m.inputs["dna"] = dg_dna;
      const DnaProfile dna = io::load_dna(dg_dna);
      const auto series = diagnostics::stepwise_gain(dna);
      const auto report = diagnostics::classify(series, th);
      m.config = Json{{"tau_neg", th.tau_neg}, {"t_late", th.t_late}, {"n_osc", th.n_osc}, {"kappa", th.kappa},
                      {"monotone_tol", th.monotone_tol}};
      Json j = io::report_to_json(report);
      j["source"] = dna.meta;
      emit(dg_out, io::dump_stable(j), m);
      if (!dg_csv.empty()) emit(dg_csv, io::gains_to_csv(series), m);
      write_manifest(dg_out, args, m);
    };
  });

  std::string ro_scenario, ro_schedule, ro_out;
  bool ro_correction = true;
  auto* roll = app.add_subcommand("rollout", "Execute a schedule in the linear-flow simulator");
  roll->add_option("--scenario", ro_scenario, "Scenario JSON")->required();
  roll->add_option("--schedule", ro_schedule, "Schedule JSON (as written by plan)")->required();
  roll->add_option("--out", ro_out, "Output CSV (step,t,drift_sq,err_sq)")->required();
  roll->add_flag("--correction,!--no-correction", ro_correction, "Restart every step from the ideal state");
  roll->callback([&] {
    action = [&] {
      m.command = "rollout";
      m.inputs = Json{{"scenario", ro_scenario}, {"schedule", ro_schedule}};
      m.config = Json{{"correction", ro_correction}};
      const auto s = io::scenario_from_json(io::read_json(ro_scenario));
      const auto sched = io::schedule_from_json(io::read_json(ro_schedule));
      emit(ro_out, io::rollout_to_csv(flow::rollout(s, sched.timesteps, ro_correction)), m);
      write_manifest(ro_out, args, m);
    };
  });

  std::string pr_params, pr_embedding, pr_out, pr_grid;
  bool pr_zero = false;
  double pr_floor = 1e-12;
  auto* pred = app.add_subcommand("predict", "Predict a DNA profile from a condition embedding");
  pred->add_option("--params", pr_params, "Regressor parameters JSON")->required();
  pred->add_option("--embedding", pr_embedding, "Embedding JSON (array or {\"embedding\": [...]})")->required();
  pred->add_option("--out", pr_out, "Output DNA JSON")->required();
  pred->add_option("--grid-from", pr_grid, "Take the time grid from this DNA file");
  pred->add_flag("--include-zero", pr_zero, "Default grid includes t = 0");
  pred->add_option("--floor", pr_floor, "Lower clamp applied to predictions")->check(CLI::NonNegativeNumber);
  pred->callback([&] {
    action = [&] {
      m.command = "predict";
      m.inputs = Json{{"params", pr_params}, {"embedding", pr_embedding}};
      const auto params = io::params_from_json(io::read_json(pr_params));
      const auto e = read_embedding(pr_embedding);
      const auto raw = predictor::forward(params, e);
      TimeGrid grid;
      if (!pr_grid.empty()) {
        m.inputs["grid_from"] = pr_grid;
        grid = io::load_dna(pr_grid).grid;
        if (grid.size() != raw.size()) throw InvalidInput("--grid-from grid length does not match model output");
      } else {
        grid = TimeGrid::uniform(raw.size(), pr_zero);
      }
      m.config = Json{{"include_zero", pr_zero}, {"floor", pr_floor}};
      const DnaProfile dna(grid, predictor::clamp_prediction(raw, pr_floor),
                           Json{{"source", "predictor"}, {"params", pr_params}});
      emit(pr_out, io::dump_stable(io::dna_to_json(dna)), m);
      write_manifest(pr_out, args, m);
    };
  });

  std::string tr_dataset, tr_out, tr_summary;
  std::size_t tr_synthetic = 0, tr_points = 100, tr_d_in = 16;
  predictor::TrainConfig cfg;
  auto* trn = app.add_subcommand("train-predictor", "Train the DNA regressor with a cosine loss");
  trn->add_option("--dataset", tr_dataset, "Dataset JSON: [{\"embedding\": [...], \"dna\": {...}}, ...]");
  trn->add_option("--synthetic-pairs", tr_synthetic, "Train on a generated synthetic task instead");
  trn->add_option("--synthetic-dim", tr_d_in, "Embedding dimension of the synthetic task");
  trn->add_option("--synthetic-points", tr_points, "DNA length of the synthetic task");
  trn->add_option("--out", tr_out, "Output parameters JSON")->required();
  trn->add_option("--summary", tr_summary, "Also write a training summary JSON");
  trn->add_option("--epochs", cfg.epochs, "Training epochs");
  trn->add_option("--lr", cfg.learning_rate, "Learning rate")->check(CLI::PositiveNumber);
  trn->add_option("--batch", cfg.batch_size, "Batch size")->check(CLI::PositiveNumber);
  trn->add_option("--dropout", cfg.dropout, "Dropout rate in [0, 1)");
  trn->add_option("--holdout", cfg.holdout_fraction, "Held-out fraction");
  trn->add_option("--h1", cfg.widths.h1, "First hidden width")->check(CLI::PositiveNumber);
  trn->add_option("--h2", cfg.widths.h2, "Second hidden width")->check(CLI::PositiveNumber);
  trn->add_option("--seed", cfg.seed, "Seed for split, init, shuffling and dropout");
  trn->callback([&] {
    action = [&] {
      m.command = "train-predictor";
      std::vector<predictor::Sample> data;
      if (!tr_dataset.empty()) {
        m.inputs["dataset"] = tr_dataset;
        data = io::dataset_from_json(io::read_json(tr_dataset));
      } else if (tr_synthetic > 0) {
        const auto grid = TimeGrid::uniform(tr_points);
        data = predictor::synthetic_dataset(tr_synthetic, tr_d_in, grid.points(), cfg.seed);
      } else {
        throw DomainError("train-predictor needs --dataset or --synthetic-pairs");
      }
      m.seed = cfg.seed;
      m.config = Json{{"epochs", cfg.epochs},       {"learning_rate", cfg.learning_rate},
                      {"batch_size", cfg.batch_size}, {"dropout", cfg.dropout},
                      {"holdout_fraction", cfg.holdout_fraction}, {"h1", cfg.widths.h1},
                      {"h2", cfg.widths.h2},         {"beta1", cfg.beta1},
                      {"beta2", cfg.beta2},          {"adam_eps", cfg.adam_eps},
                      {"synthetic_pairs", tr_synthetic}, {"synthetic_dim", tr_d_in},
                      {"synthetic_points", tr_points}};
      const auto r = predictor::train(data, cfg);
      emit(tr_out, io::dump_stable(io::params_to_json(r.params)), m);
      if (!tr_summary.empty()) {
        Json s;
        s["train_size"] = r.train_size;
        s["holdout_size"] = r.holdout_size;
        s["holdout_mean_cosine"] = r.holdout_mean_cosine;
        s["holdout_median_cosine"] = r.holdout_median_cosine;
        s["loss_history"] = r.loss_history;
        s["param_count"] = r.params.param_count();
        emit(tr_summary, io::dump_stable(s), m);
      }
      write_manifest(tr_out, args, m);
    };
  });

  std::string rp_manifest;
  auto* rep = app.add_subcommand("replay", "Re-run a command from its run manifest");
  rep->add_option("manifest", rp_manifest, "Manifest JSON written next to a previous output")->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (rep->parsed()) {
      const Json j = io::read_json(rp_manifest);
      if (!j.contains("args") || !j.at("args").is_array()) {
        throw InvalidInput("manifest has no 'args' array");
      }
      const auto replay_args = j.at("args").get<std::vector<std::string>>();
      if (!replay_args.empty() && replay_args.front() == "replay") {
        throw InvalidInput("manifest refers to another replay");
      }
      return run(replay_args, out, err);
    }
    action();
    return kOk;
  } catch (const InvalidInput& e) {
    err << "invalid input:\n" << e.what() << (std::string_view(e.what()).ends_with('\n') ? "" : "\n");
    return kInvalidInput;
  } catch (const Infeasible& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace dnaplan::cli
