#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "shapedist/bounds.hpp"
#include "shapedist/csv.hpp"
#include "shapedist/error.hpp"
#include "shapedist/pipeline.hpp"
#include "shapedist/sweep.hpp"

namespace {

using nlohmann::json;
using namespace shapedist;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitInfeasible = 5;

struct OutputTarget {
  std::string path;  // empty -> stdout
  void write(const std::string& content) const {
    if (path.empty())
      std::cout << content;
    else
      io::write_text_atomic(path, content);
  }
};

std::string opt_str(const std::optional<double>& v) {
  return v ? io::format_double(*v) : std::string();
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
  std::string x_path, y_path, x_rep_path, y_rep_path;
  std::string estimator = "both";
  MomentPipelineConfig cfg;
  bool center = false;
  double bound = 0.0;  // 0 = no validation
  bool seed_set = false;
  std::string out, format = "json";
};

void report_to_json(const EstimateReport& r, json& out) {
  out["kind"] = to_string(r.kind);
  out["value"] = r.value;
  if (r.value_clipped) out["value_clipped"] = *r.value_clipped;
  if (r.bias_bound) out["bias_bound"] = *r.bias_bound;
  if (r.std_error) out["std_error"] = *r.std_error;
  if (r.ci_low) out["ci_low"] = *r.ci_low;
  if (r.ci_high) out["ci_high"] = *r.ci_high;
  if (r.alpha) out["alpha"] = *r.alpha;
  // Report conveniences: metric transforms of the raw scores.
  if (r.kind == EstimateKind::plugin_sq_procrustes)
    out["procrustes_distance"] = std::sqrt(std::max(0.0, r.value));
  if (r.value_clipped &&
      (r.kind == EstimateKind::plugin_cos_similarity ||
       r.kind == EstimateKind::moment_cos_similarity))
    out["angle_radians"] = std::acos(*r.value_clipped);
}

int run_estimate(const EstimateArgs& args) {
  const bool wants_moments = args.estimator != "plugin";
  if (wants_moments && !args.seed_set) {
    std::cerr << "estimate: --seed is required for the moment estimator\n";
    return kExitUsage;
  }
  if (args.x_rep_path.empty() != args.y_rep_path.empty()) {
    std::cerr << "estimate: provide both --x-rep and --y-rep or neither\n";
    return kExitUsage;
  }

  ResponseMatrix x = io::load_response_csv(args.x_path);
  ResponseMatrix y = io::load_response_csv(args.y_path);
  std::optional<ResponseMatrix> x_rep, y_rep;
  if (!args.x_rep_path.empty()) {
    x_rep = io::load_response_csv(args.x_rep_path);
    y_rep = io::load_response_csv(args.y_rep_path);
  }
  if (args.center) {
    x = center_columns(x);
    y = center_columns(y);
    if (x_rep) x_rep = center_columns(*x_rep);
    if (y_rep) y_rep = center_columns(*y_rep);
  }
  if (args.bound > 0.0) {
    validate_row_bound(x, args.bound);
    validate_row_bound(y, args.bound);
    if (x_rep) validate_row_bound(*x_rep, args.bound);
    if (y_rep) validate_row_bound(*y_rep, args.bound);
  }

  std::vector<EstimateReport> reports;
  std::optional<MomentPipelineResult> moment_result;
  if (args.estimator == "plugin" || args.estimator == "both") {
    const PluginResult p = run_plugin_estimators(x, y, x_rep, y_rep, 0);
    reports.push_back(p.sq_procrustes);
    reports.push_back(p.cosine);
  }
  if (wants_moments) {
    moment_result = run_moment_pipeline(x, y, x_rep, y_rep, args.cfg);
    reports.push_back(moment_result->nuclear);
    reports.push_back(moment_result->cosine);
  }

  json config;
  config["estimator"] = args.estimator;
  config["order"] = args.cfg.order;
  if (args.cfg.bias_cap) config["bias_cap"] = *args.cfg.bias_cap;
  config["n_boot"] = args.cfg.n_boot;
  config["alpha"] = args.cfg.alpha;
  config["grid_size"] = args.cfg.grid_size;
  config["tuple_budget"] = args.cfg.tuple_budget;
  config["margin"] = args.cfg.margin;
  config["seed"] = args.cfg.seed;
  config["center"] = args.center;
  config["split_trial"] = x_rep.has_value();
  config["x"] = args.x_path;
  config["y"] = args.y_path;
  if (!args.x_rep_path.empty()) {
    config["x_rep"] = args.x_rep_path;
    config["y_rep"] = args.y_rep_path;
  }
  if (moment_result) {
    config["kappa"] = moment_result->kappa;
    config["denominator"] = moment_result->denom;
  }

  OutputTarget target{args.out};
  if (args.format == "json") {
    json doc;
    doc["schema_version"] = 1;
    doc["command"] = "estimate";
    doc["config"] = config;
    json rj = json::array();
    for (const auto& r : reports) {
      json o;
      report_to_json(r, o);
      rj.push_back(o);
    }
    doc["reports"] = rj;
    target.write(doc.dump(2) + "\n");
  } else {
    io::Table t;
    t.columns = {"kind",    "value",   "value_clipped", "bias_bound", "std_error",
                 "ci_low",  "ci_high", "alpha",         "kappa",      "denominator",
                 "order",   "bias_cap", "n_boot",       "grid_size",  "tuple_budget",
                 "margin",  "seed",    "split_trial"};
    for (const auto& r : reports) {
      std::vector<std::string> row;
      row.push_back(to_string(r.kind));
      row.push_back(io::format_double(r.value));
      row.push_back(opt_str(r.value_clipped));
      row.push_back(opt_str(r.bias_bound));
      row.push_back(opt_str(r.std_error));
      row.push_back(opt_str(r.ci_low));
      row.push_back(opt_str(r.ci_high));
      row.push_back(opt_str(r.alpha));
      row.push_back(moment_result ? io::format_double(moment_result->kappa) : "");
      row.push_back(moment_result ? io::format_double(moment_result->denom) : "");
      row.push_back(std::to_string(args.cfg.order));
      row.push_back(opt_str(args.cfg.bias_cap));
      row.push_back(std::to_string(args.cfg.n_boot));
      row.push_back(std::to_string(args.cfg.grid_size));
      row.push_back(std::to_string(args.cfg.tuple_budget));
      row.push_back(io::format_double(args.cfg.margin));
      row.push_back(std::to_string(args.cfg.seed));
      row.push_back(x_rep ? "1" : "0");
      t.rows.push_back(std::move(row));
    }
    target.write(io::to_csv(t));
  }
  return 0;
}

// ---------------------------------------------------------------- simulate

std::vector<sweep::SweepCondition> parse_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open grid file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty grid file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) header.push_back(f);
  }
  auto col = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  };
  const int c_target = col("target_cos"), c_n = col("n"), c_m = col("m");
  const int c_cap = col("bias_cap"), c_noise = col("noise_std"), c_rep = col("replicates");
  if (c_target < 0 || c_n < 0 || c_m < 0)
    throw DataError(path + ": grid header must include target_cos,n,m");
  std::vector<sweep::SweepCondition> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    while (fields.size() < header.size()) fields.push_back("");
    auto get = [&](int c) -> std::string {
      return c >= 0 && static_cast<std::size_t>(c) < fields.size() ? fields[c] : "";
    };
    try {
      sweep::SweepCondition c;
      c.target_cos = std::stod(get(c_target));
      c.n = static_cast<std::size_t>(std::stoull(get(c_n)));
      c.m = static_cast<std::size_t>(std::stoull(get(c_m)));
      if (!get(c_cap).empty()) c.bias_cap = std::stod(get(c_cap));
      if (!get(c_noise).empty()) c.noise_std = std::stod(get(c_noise));
      if (!get(c_rep).empty()) c.replicates = std::stoi(get(c_rep));
      out.push_back(c);
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(line_no) + ": cannot parse grid row");
    }
  }
  if (out.empty()) throw DataError(path + ": no grid rows");
  return out;
}

io::Table sweep_table(const std::string& preset_name,
                      const std::vector<sweep::SweepRow>& rows,
                      const sweep::SweepSettings& s) {
  io::Table t;
  t.columns = {"preset",        "condition",   "target_cos", "n",
               "m",             "bias_cap",    "noise_std",  "estimator",
               "trials",        "mean",        "sd",         "bias_bound",
               "variance_term", "coverage",    "kappa",      "order",
               "grid_size",     "tuple_budget","cov_datasets", "alpha",
               "margin",        "trace_scale_per_unit",      "seed",
               "error"};
  for (const auto& r : rows) {
    std::vector<std::string> row;
    row.push_back(preset_name);
    row.push_back(std::to_string(r.condition));
    row.push_back(io::format_double(r.params.target_cos));
    row.push_back(std::to_string(r.params.n));
    row.push_back(std::to_string(r.params.m));
    row.push_back(opt_str(r.params.bias_cap));
    row.push_back(io::format_double(r.params.noise_std));
    row.push_back(r.estimator);
    row.push_back(std::to_string(r.trials));
    row.push_back(r.error.empty() ? io::format_double(r.mean) : "");
    row.push_back(r.error.empty() ? io::format_double(r.sd) : "");
    row.push_back(opt_str(r.bias_bound));
    row.push_back(opt_str(r.variance_term));
    row.push_back(opt_str(r.coverage));
    row.push_back(opt_str(r.kappa));
    row.push_back(std::to_string(s.order));
    row.push_back(std::to_string(s.grid_size));
    row.push_back(std::to_string(s.tuple_budget));
    row.push_back(std::to_string(s.cov_datasets));
    row.push_back(io::format_double(s.alpha));
    row.push_back(io::format_double(s.margin));
    row.push_back(io::format_double(s.trace_scale_per_unit));
    row.push_back(std::to_string(s.seed));
    row.push_back(r.error);
  }
  return t;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shapedist: shape-distance estimators for high-dimensional responses"};
  app.require_subcommand(1);

  // estimate
  EstimateArgs est;
  CLI::App* cmd_est = app.add_subcommand("estimate", "estimate shape distances from CSVs");
  cmd_est->add_option("--x", est.x_path, "response CSV for network i")->required();
  cmd_est->add_option("--y", est.y_path, "response CSV for network j")->required();
  cmd_est->add_option("--x-rep", est.x_rep_path, "replicate responses for network i");
  cmd_est->add_option("--y-rep", est.y_rep_path, "replicate responses for network j");
  cmd_est->add_option("--estimator", est.estimator, "plugin|moments|both")
      ->check(CLI::IsMember({"plugin", "moments", "both"}));
  cmd_est->add_option("--order", est.cfg.order, "moment truncation order P");
  double cap_value = -1.0;
  CLI::Option* cap_opt = cmd_est->add_option("--bias-cap", cap_value,
                                             "absolute bias cap on the similarity score");
  cmd_est->add_option("--n-boot", est.cfg.n_boot, "bootstrap replicates");
  cmd_est->add_option("--alpha", est.cfg.alpha, "CI level (two-sided)");
  cmd_est->add_option("--grid-size", est.cfg.grid_size, "QP grid points on [0,1]");
  cmd_est->add_option("--tuple-budget", est.cfg.tuple_budget, "tuples per moment");
  cmd_est->add_option("--margin", est.cfg.margin, "rescale safety margin");
  CLI::Option* seed_opt = cmd_est->add_option("--seed", est.cfg.seed, "RNG seed");
  cmd_est->add_flag("--center", est.center, "center columns before estimating");
  cmd_est->add_option("--bound", est.bound, "validate rows against B*sqrt(N)");
  cmd_est->add_option("--out", est.out, "output path (default stdout)");
  cmd_est->add_option("--format", est.format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));

  // simulate
  std::string sim_preset = "fig2a", sim_grid, sim_out, sim_format = "csv";
  sweep::SweepSettings sim;
  bool sim_trials_set = false;
  CLI::App* cmd_sim = app.add_subcommand("simulate", "synthetic estimator sweeps");
  cmd_sim->add_option("--preset", sim_preset, "fig2a|fig2b|fig2c|fig2d|fig3a|custom");
  cmd_sim->add_option("--grid", sim_grid, "condition grid CSV (preset=custom)");
  cmd_sim->add_option("--trials", sim.trials, "trials per condition")
      ->each([&](const std::string&) { sim_trials_set = true; });
  cmd_sim->add_option("--cov-datasets", sim.cov_datasets,
                      "fresh datasets for the moment covariance");
  cmd_sim->add_option("--order", sim.order, "moment truncation order P");
  cmd_sim->add_option("--grid-size", sim.grid_size, "QP grid points");
  cmd_sim->add_option("--tuple-budget", sim.tuple_budget, "tuples per moment");
  cmd_sim->add_option("--alpha", sim.alpha, "CI level");
  cmd_sim->add_option("--margin", sim.margin, "rescale safety margin");
  cmd_sim->add_option("--trace-scale", sim.trace_scale_per_unit, "Tr[S_ii]/N");
  CLI::Option* sim_seed_opt = cmd_sim->add_option("--seed", sim.seed, "RNG seed");
  cmd_sim->add_option("--out", sim_out, "output path (default stdout)");
  cmd_sim->add_option("--format", sim_format, "csv|json")
      ->check(CLI::IsMember({"json", "csv"}));

  // verify-lower-bound
  std::size_t vlb_n = 50;
  std::vector<std::size_t> vlb_m_grid;
  std::size_t vlb_trials = 20;
  bool vlb_rademacher = false;
  std::uint64_t vlb_seed = 0;
  std::string vlb_out, vlb_format = "csv";
  CLI::App* cmd_vlb =
      app.add_subcommand("verify-lower-bound", "empirical nuclear norm vs. asymptote");
  cmd_vlb->add_option("--n", vlb_n, "dimension");
  cmd_vlb->add_option("--m-grid", vlb_m_grid, "sample counts")->required();
  cmd_vlb->add_option("--trials", vlb_trials, "trials per point");
  cmd_vlb->add_flag("--rademacher", vlb_rademacher, "Rademacher entries instead of Gaussian");
  CLI::Option* vlb_seed_opt = cmd_vlb->add_option("--seed", vlb_seed, "RNG seed");
  cmd_vlb->add_option("--out", vlb_out, "output path (default stdout)");
  cmd_vlb->add_option("--format", vlb_format, "csv|json")
      ->check(CLI::IsMember({"json", "csv"}));

  // bounds
  std::string bnd_grid, bnd_out, bnd_format = "csv";
  double bnd_b = 1.0, bnd_delta = 0.05;
  std::size_t bnd_n = 0, bnd_m = 0;
  CLI::App* cmd_bnd = app.add_subcommand("bounds", "evaluate the theoretical bounds");
  cmd_bnd->add_option("--grid", bnd_grid, "grid CSV with columns B,N,M,delta");
  cmd_bnd->add_option("--b", bnd_b, "response bound B (single point)");
  cmd_bnd->add_option("--n", bnd_n, "dimension (single point)");
  cmd_bnd->add_option("--m", bnd_m, "sample count (single point)");
  cmd_bnd->add_option("--delta", bnd_delta, "failure probability (single point)");
  cmd_bnd->add_option("--out", bnd_out, "output path (default stdout)");
  cmd_bnd->add_option("--format", bnd_format, "csv|json")
      ->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (cmd_est->parsed()) {
      if (cap_opt->count()) {
        if (cap_value < 0.0) {
          std::cerr << "estimate: --bias-cap must be non-negative\n";
          return kExitUsage;
        }
        est.cfg.bias_cap = cap_value;
      }
      est.seed_set = seed_opt->count() > 0;
      return run_estimate(est);
    }
    if (cmd_sim->parsed()) {
      if (sim_seed_opt->count() == 0) {
        std::cerr << "simulate: --seed is required\n";
        return kExitUsage;
      }
      std::vector<sweep::SweepCondition> conditions;
      std::string name = sim_preset;
      if (sim_preset == "custom") {
        if (sim_grid.empty()) {
          std::cerr << "simulate: --grid is required with --preset custom\n";
          return kExitUsage;
        }
        conditions = parse_grid_file(sim_grid);
      } else {
        const sweep::Preset* p = sweep::find_preset(sim_preset);
        if (p == nullptr) {
          std::cerr << "simulate: unknown preset '" << sim_preset << "'\n";
          return kExitUsage;
        }
        conditions = p->conditions;
        if (!sim_trials_set) sim.trials = p->default_trials;
      }
      const std::vector<sweep::SweepRow> rows = sweep::run_similarity_sweep(conditions, sim);
      const io::Table t = sweep_table(name, rows, sim);
      OutputTarget target{sim_out};
      target.write(sim_format == "json" ? io::to_json(t) : io::to_csv(t));
      return 0;
    }
    if (cmd_vlb->parsed()) {
      if (vlb_seed_opt->count() == 0) {
        std::cerr << "verify-lower-bound: --seed is required\n";
        return kExitUsage;
      }
      const auto rows = bounds::verify_lower_bound_experiment(
          vlb_n, vlb_m_grid, vlb_trials, vlb_seed, vlb_rademacher, 0);
      io::Table t;
      t.columns = {"n", "m", "trials", "mean_nuclear", "sd_nuclear", "asymptote", "seed"};
      for (const auto& r : rows)
        t.rows.push_back({std::to_string(r.n), std::to_string(r.m),
                          std::to_string(r.trials), io::format_double(r.mean_nuclear),
                          io::format_double(r.sd_nuclear), io::format_double(r.asymptote),
                          std::to_string(vlb_seed)});
      OutputTarget target{vlb_out};
      target.write(vlb_format == "json" ? io::to_json(t) : io::to_csv(t));
      return 0;
    }
    if (cmd_bnd->parsed()) {
      std::vector<bounds::BoundParams> grid;
      if (!bnd_grid.empty()) {
        std::ifstream in(bnd_grid);
        if (!in) throw DataError("cannot open grid file: " + bnd_grid);
        std::string line;
        std::size_t line_no = 0;
        bool header = true;
        while (std::getline(in, line)) {
          ++line_no;
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (line.empty()) continue;
          if (header) {
            header = false;
            continue;
          }
          std::stringstream ss(line);
          std::string f;
          std::vector<std::string> fields;
          while (std::getline(ss, f, ',')) fields.push_back(f);
          if (fields.size() < 4)
            throw DataError(bnd_grid + ":" + std::to_string(line_no) + ": need B,N,M,delta");
          bounds::BoundParams p;
          p.b = std::stod(fields[0]);
          p.n = static_cast<std::size_t>(std::stoull(fields[1]));
          p.m = static_cast<std::size_t>(std::stoull(fields[2]));
          p.delta = std::stod(fields[3]);
          grid.push_back(p);
        }
        if (grid.empty()) throw DataError(bnd_grid + ": no grid rows");
      } else {
        if (bnd_n == 0 || bnd_m == 0) {
          std::cerr << "bounds: provide --grid or all of --b --n --m --delta\n";
          return kExitUsage;
        }
        grid.push_back({bnd_b, bnd_n, bnd_m, bnd_delta});
      }
      io::Table t;
      t.columns = {"B", "N", "M", "delta", "lemma1", "lemma2", "theorem1", "theorem2_lower"};
      for (const auto& p : grid)
        t.rows.push_back({io::format_double(p.b), std::to_string(p.n), std::to_string(p.m),
                          io::format_double(p.delta),
                          io::format_double(bounds::lemma1_bound(p)),
                          io::format_double(bounds::lemma2_bound(p.b, p.n, p.m)),
                          io::format_double(bounds::theorem1_bound(p)),
                          io::format_double(bounds::plugin_error_lower_bound(p))});
      OutputTarget target{bnd_out};
      target.write(bnd_format == "json" ? io::to_json(t) : io::to_csv(t));
      return 0;
    }
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
