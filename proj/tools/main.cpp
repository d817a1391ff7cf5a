// Command-line front end: simulate | fit | gmm | train | infer | benchmark.
// Settings resolve as flags > --config JSON > defaults; every run writes the
// resolved set to <out>/effective_config.json and keeps all outputs under the
// --out directory. Exit codes: 0 success, 1 runtime/IO failure, 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oukit/bench.hpp"
#include "oukit/io.hpp"
#include "oukit/mle.hpp"
#include "oukit/parallel.hpp"
#include "oukit/rng.hpp"
#include "oukit/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace oukit;

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CommonArgs {
  std::uint64_t seed = 0;
  std::string out = "oukit_out";
  std::string config;
  int threads = 1;
  int verbose = 0;
};

void add_common(CLI::App& cmd, CommonArgs& args) {
  cmd.add_option("--seed", args.seed, "Master RNG seed");
  cmd.add_option("--out", args.out, "Output directory");
  cmd.add_option("--config", args.config, "JSON config file; flags override its values");
  cmd.add_option("--threads", args.threads, "Worker-thread cap for parallel sections");
  cmd.add_flag("-v,--verbose", args.verbose, "Verbose progress output");
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config " + path + " is not valid JSON: " + e.what());
  }
}

// Flags beat the config file; the config beats defaults.
template <class T>
void merge(const CLI::App& cmd, const json& cfg, const std::string& flag, const char* key,
           T& value) {
  const CLI::Option* opt = cmd.get_option_no_throw(flag);
  if (opt != nullptr && opt->count() > 0) return;
  if (cfg.contains(key)) {
    try {
      value = cfg.at(key).get<T>();
    } catch (const json::exception&) {
      throw UsageError(std::string("config key '") + key + "' has the wrong type");
    }
  }
}

void merge_common(const CLI::App& cmd, const json& cfg, CommonArgs& args) {
  merge(cmd, cfg, "--seed", "seed", args.seed);
  merge(cmd, cfg, "--out", "out", args.out);
  merge(cmd, cfg, "--threads", "threads", args.threads);
}

json common_json(const std::string& command, const CommonArgs& args) {
  return {{"command", command},
          {"seed", args.seed},
          {"out", args.out},
          {"threads", args.threads}};
}

void write_effective_config(const fs::path& out_dir, const json& doc) {
  fs::create_directories(out_dir);
  std::ofstream out(out_dir / "effective_config.json");
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("cannot write effective_config.json");
}

std::vector<std::string> resolve_inputs(const json& cfg, std::vector<std::string> positional) {
  if (positional.empty() && cfg.contains("inputs")) {
    positional = cfg.at("inputs").get<std::vector<std::string>>();
  }
  if (positional.empty()) throw UsageError("no input trajectory files given");
  return positional;
}

struct LoadedPath {
  std::string file;
  std::optional<Trajectory> trajectory;  // empty when parsing failed
  std::optional<OUParams> truth;
};

// Missing files are fatal; unparsable ones become per-path failures.
std::vector<LoadedPath> load_paths(const std::vector<std::string>& inputs,
                                   const std::optional<io::DatasetManifest>& manifest,
                                   const fs::path& manifest_dir) {
  std::vector<LoadedPath> out;
  out.reserve(inputs.size());
  for (const auto& input : inputs) {
    if (!fs::exists(input)) throw IoError("input file " + input + " does not exist");
    LoadedPath entry;
    entry.file = input;
    try {
      entry.trajectory = io::read_trajectory_csv(input);
    } catch (const IoError&) {
      entry.trajectory.reset();
    }
    if (manifest) {
      const std::string name = fs::path(input).filename().string();
      for (const auto& file : manifest->files) {
        if (file.file == name ||
            fs::weakly_canonical(manifest_dir / file.file) == fs::weakly_canonical(input)) {
          entry.truth = file.params;
          break;
        }
      }
    }
    out.push_back(std::move(entry));
  }
  return out;
}

const char* stage_name(MleStage stage) {
  switch (stage) {
    case MleStage::gmm: return "gmm";
    case MleStage::bfgs: return "bfgs";
    case MleStage::basinhop: return "basinhop";
  }
  return "gmm";
}

void write_trace_csv(const fs::path& path, const std::vector<TraceRow>& rows) {
  std::ofstream out(path);
  out << "iter,f,grad_norm,alpha\n";
  for (const auto& row : rows) {
    out << row.iteration << ',' << io::format_double(row.f) << ','
        << io::format_double(row.grad_norm) << ',' << io::format_double(row.alpha) << '\n';
  }
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  double theta = 1.0;
  double sigma_sq = 1.0;
  double dt = 0.01;
  int steps = 500;
  int count = 1;
  double k = 30.0;
  std::string init = "uniform_k_sigma";
  double x0 = 0.0;
};

int cmd_simulate(const CLI::App& cmd, CommonArgs& common, const json& cfg, SimulateArgs& args) {
  merge_common(cmd, cfg, common);
  merge(cmd, cfg, "--theta", "theta", args.theta);
  merge(cmd, cfg, "--sigma-sq", "sigma_sq", args.sigma_sq);
  merge(cmd, cfg, "--dt", "dt", args.dt);
  merge(cmd, cfg, "--steps", "steps", args.steps);
  merge(cmd, cfg, "--count", "count", args.count);
  merge(cmd, cfg, "--k", "k", args.k);
  merge(cmd, cfg, "--init", "init_mode", args.init);
  merge(cmd, cfg, "--x0", "x0", args.x0);

  const OUParams params{args.theta, args.sigma_sq};
  const GridSpec grid{args.dt, args.steps};
  SimConfig sim;
  sim.seed = common.seed;
  sim.k = args.k;
  sim.x0 = args.x0;
  try {
    sim.init_mode = io::init_mode_from_string(args.init);
    params.validate();
    grid.validate();
    sim.validate();
    if (args.count < 1) throw EmptyInput("count must be >= 1");
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }

  json effective = common_json("simulate", common);
  effective["theta"] = args.theta;
  effective["sigma_sq"] = args.sigma_sq;
  effective["dt"] = args.dt;
  effective["steps"] = args.steps;
  effective["count"] = args.count;
  effective["k"] = args.k;
  effective["init_mode"] = args.init;
  effective["x0"] = args.x0;

  const fs::path out_dir(common.out);
  write_effective_config(out_dir, effective);

  const auto batch = simulate_batch({params}, grid, sim, args.count, common.threads);

  io::DatasetManifest manifest;
  manifest.master_seed = common.seed;
  manifest.grid = grid;
  manifest.init_mode = sim.init_mode;
  manifest.k = args.k;
  manifest.combos = {{params, args.count}};
  for (std::size_t i = 0; i < batch.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "traj_%06zu.csv", i);
    const fs::path file = out_dir / name;
    io::write_trajectory_csv(file, batch[i].trajectory);
    std::ifstream in(file, std::ios::binary);
    const std::string bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    manifest.files.push_back({name, batch[i].params, io::fnv1a64_hex(bytes)});
  }
  io::write_manifest(out_dir / "manifest.json", manifest);

  std::cout << "wrote " << batch.size() << " trajectories and manifest.json to "
            << out_dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_gmm(const CLI::App& cmd, CommonArgs& common, const json& cfg,
            std::vector<std::string> inputs) {
  merge_common(cmd, cfg, common);
  const auto files = resolve_inputs(cfg, std::move(inputs));

  json effective = common_json("gmm", common);
  effective["inputs"] = files;
  const fs::path out_dir(common.out);
  write_effective_config(out_dir, effective);

  const auto loaded = load_paths(files, std::nullopt, {});
  std::ostringstream csv;
  csv << "file,theta_hat,sigma_sq_hat,rho_hat,rho_clamped,theta_floored\n";
  int failed = 0;
  for (const auto& entry : loaded) {
    bool ok = false;
    if (entry.trajectory) {
      try {
        const GmmEstimate est = gmm_initialize(*entry.trajectory);
        csv << entry.file << ',' << io::format_double(est.theta_hat) << ','
            << io::format_double(est.sigma_sq_hat) << ',' << io::format_double(est.rho_hat)
            << ',' << (est.rho_clamped ? 1 : 0) << ',' << (est.theta_floored ? 1 : 0) << '\n';
        ok = true;
      } catch (const std::exception&) {
      }
    }
    if (!ok) {
      ++failed;
      csv << entry.file << ",nan,nan,nan,0,0\n";
    }
  }
  std::ofstream out(out_dir / "gmm.csv");
  out << csv.str();
  std::cout << "gmm estimates for " << loaded.size() - failed << "/" << loaded.size()
            << " paths -> " << (out_dir / "gmm.csv").string() << "\n";
  return failed == static_cast<int>(loaded.size()) ? 1 : 0;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  double grad_tol = 1e-6;
  int max_iters = 200;
  int hops = 50;
  double hop_scale = 0.5;
  double hop_temp = 1.0;
  bool no_basinhop = false;
  std::string manifest_path;
};

int cmd_fit(const CLI::App& cmd, CommonArgs& common, const json& cfg, FitArgs& args,
            std::vector<std::string> inputs) {
  merge_common(cmd, cfg, common);
  merge(cmd, cfg, "--grad-tol", "grad_tolerance", args.grad_tol);
  merge(cmd, cfg, "--max-iters", "max_bfgs_iters", args.max_iters);
  merge(cmd, cfg, "--hops", "basin_hops", args.hops);
  merge(cmd, cfg, "--hop-scale", "hop_scale", args.hop_scale);
  merge(cmd, cfg, "--hop-temp", "hop_temperature", args.hop_temp);
  merge(cmd, cfg, "--no-basinhop", "no_basinhop", args.no_basinhop);
  merge(cmd, cfg, "--manifest", "manifest", args.manifest_path);
  const auto files = resolve_inputs(cfg, std::move(inputs));

  MleConfig mle;
  mle.grad_tolerance = args.grad_tol;
  mle.max_bfgs_iters = args.max_iters;
  mle.basin_hops = args.no_basinhop ? 0 : args.hops;
  mle.hop_scale = args.hop_scale;
  mle.hop_temperature = args.hop_temp;
  try {
    mle.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }

  json effective = common_json("fit", common);
  effective["grad_tolerance"] = args.grad_tol;
  effective["max_bfgs_iters"] = args.max_iters;
  effective["basin_hops"] = args.hops;
  effective["hop_scale"] = args.hop_scale;
  effective["hop_temperature"] = args.hop_temp;
  effective["no_basinhop"] = args.no_basinhop;
  effective["manifest"] = args.manifest_path;
  effective["inputs"] = files;
  const fs::path out_dir(common.out);
  write_effective_config(out_dir, effective);

  std::optional<io::DatasetManifest> manifest;
  if (!args.manifest_path.empty()) manifest = io::read_manifest(args.manifest_path);
  const auto loaded =
      load_paths(files, manifest, fs::path(args.manifest_path).parent_path());

  struct Row {
    bool ok = false;
    EstimationResult fit;
  };
  std::vector<Row> rows(loaded.size());
  std::vector<std::vector<TraceRow>> traces(common.verbose >= 2 ? loaded.size() : 0);

  parallel_for(loaded.size(), common.threads, [&](std::size_t i) {
    if (!loaded[i].trajectory) return;
    MleConfig per_path = mle;
    per_path.hop_seed = derive_seed(common.seed, 17, i);
    if (common.verbose >= 2) {
      auto& trace = traces[i];
      per_path.on_iterate = [&trace](const BfgsIterate& it) {
        trace.push_back({it.iteration, it.f, it.grad_norm, it.alpha});
      };
    }
    try {
      rows[i].fit = fit_mle(*loaded[i].trajectory, per_path);
      rows[i].ok = true;
    } catch (const std::exception&) {
      rows[i].ok = false;
    }
  });

  json reports = json::array();
  std::ostringstream csv;
  csv << "file,theta_hat,sigma_sq_hat,loglik,converged,stage,iters,wall_time_s,"
         "theta_true,sigma_sq_true\n";
  int n_ok = 0;
  double wall_total = 0.0;
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    const auto& entry = loaded[i];
    if (rows[i].ok) {
      const EstimationResult& fit = rows[i].fit;
      ++n_ok;
      wall_total += fit.wall_time_s;
      reports.push_back({{"file", entry.file},
                         {"theta_hat", fit.params_hat.theta},
                         {"sigma_sq_hat", fit.params_hat.sigma_sq},
                         {"loglik", fit.log_likelihood},
                         {"converged", fit.converged},
                         {"stage", stage_name(fit.stage_reached)},
                         {"iters", fit.iterations},
                         {"wall_time_s", fit.wall_time_s}});
      csv << entry.file << ',' << io::format_double(fit.params_hat.theta) << ','
          << io::format_double(fit.params_hat.sigma_sq) << ','
          << io::format_double(fit.log_likelihood) << ',' << (fit.converged ? 1 : 0) << ','
          << stage_name(fit.stage_reached) << ',' << fit.iterations << ','
          << io::format_double(fit.wall_time_s) << ',';
    } else {
      reports.push_back({{"file", entry.file}, {"failed", true}});
      csv << entry.file << ",nan,nan,nan,0,failed,0,0,";
    }
    csv << (entry.truth ? io::format_double(entry.truth->theta) : "") << ','
        << (entry.truth ? io::format_double(entry.truth->sigma_sq) : "") << '\n';
  }

  {
    std::ofstream out(out_dir / "fits.json");
    out << reports.dump(2) << "\n";
    std::ofstream csv_out(out_dir / "fits.csv");
    csv_out << csv.str();
  }
  for (std::size_t i = 0; i < traces.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "trace_%06zu.csv", i);
    write_trace_csv(out_dir / name, traces[i]);
  }

  const int n_failed = static_cast<int>(loaded.size()) - n_ok;
  std::cout << "fitted " << n_ok << "/" << loaded.size() << " paths (" << n_failed
            << " failed), mean wall time " << (n_ok > 0 ? wall_total / n_ok : 0.0) << " s\n";
  return n_ok == 0 ? 1 : 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  int epochs = 100;
  int batch_size = 128;
  double lr = 0.001;
  int hidden = 32;
  double split = 0.8;
  double delta = 1.0;
  double w_theta = 1.0;
  double w_sigma_sq = 0.5;
};

int cmd_train(const CLI::App& cmd, CommonArgs& common, const json& cfg, TrainArgs& args,
              std::vector<std::string> manifests) {
  merge_common(cmd, cfg, common);
  merge(cmd, cfg, "--epochs", "epochs", args.epochs);
  merge(cmd, cfg, "--batch-size", "batch_size", args.batch_size);
  merge(cmd, cfg, "--lr", "learning_rate", args.lr);
  merge(cmd, cfg, "--hidden", "hidden_size", args.hidden);
  merge(cmd, cfg, "--split", "split_fraction", args.split);
  merge(cmd, cfg, "--delta", "delta", args.delta);
  merge(cmd, cfg, "--w-theta", "w_theta", args.w_theta);
  merge(cmd, cfg, "--w-sigma-sq", "w_sigma_sq", args.w_sigma_sq);
  if (manifests.empty() && cfg.contains("manifests")) {
    manifests = cfg.at("manifests").get<std::vector<std::string>>();
  }
  if (manifests.empty()) throw UsageError("train needs at least one --manifest");

  TrainConfig train_config;
  train_config.epochs = args.epochs;
  train_config.batch_size = args.batch_size;
  train_config.learning_rate = args.lr;
  train_config.split_fraction = args.split;
  train_config.hidden_size = args.hidden;
  train_config.seed = common.seed;
  LossConfig loss;
  loss.delta = args.delta;
  loss.w_theta = args.w_theta;
  loss.w_sigma_sq = args.w_sigma_sq;
  try {
    train_config.validate();
    loss.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }

  json effective = common_json("train", common);
  effective["epochs"] = args.epochs;
  effective["batch_size"] = args.batch_size;
  effective["learning_rate"] = args.lr;
  effective["hidden_size"] = args.hidden;
  effective["split_fraction"] = args.split;
  effective["delta"] = args.delta;
  effective["w_theta"] = args.w_theta;
  effective["w_sigma_sq"] = args.w_sigma_sq;
  effective["manifests"] = manifests;
  const fs::path out_dir(common.out);
  write_effective_config(out_dir, effective);

  std::vector<LabeledTrajectory> dataset;
  for (const auto& path : manifests) {
    const io::DatasetManifest manifest = io::read_manifest(path);
    const fs::path base = fs::path(path).parent_path();
    for (const auto& file : manifest.files) {
      LabeledTrajectory item;
      item.trajectory = io::read_trajectory_csv(base / file.file);
      item.params = file.params;
      dataset.push_back(std::move(item));
    }
  }
  if (common.verbose > 0) {
    std::cerr << "loaded " << dataset.size() << " labeled trajectories\n";
  }

  const TrainResult result = train(dataset, train_config, loss);
  io::save_model(out_dir / "model.bin", result.model);
  io::write_loss_curve_csv(out_dir / "loss_curve.csv", result.curve);

  std::cout << "trained on " << result.n_train << " paths (validation " << result.n_val << ")";
  if (!result.curve.empty()) {
    std::cout << ", final train loss " << result.curve.back().train_loss << ", final val loss "
              << result.curve.back().val_loss;
  }
  std::cout << "\nmodel -> " << (out_dir / "model.bin").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_infer(const CLI::App& cmd, CommonArgs& common, const json& cfg,
              std::string model_path, std::vector<std::string> inputs) {
  merge_common(cmd, cfg, common);
  merge(cmd, cfg, "--model", "model", model_path);
  const auto files = resolve_inputs(cfg, std::move(inputs));
  if (model_path.empty()) throw UsageError("infer needs --model");

  json effective = common_json("infer", common);
  effective["model"] = model_path;
  effective["inputs"] = files;
  const fs::path out_dir(common.out);
  write_effective_config(out_dir, effective);

  const LstmModel model = io::load_model(model_path);
  const auto loaded = load_paths(files, std::nullopt, {});
  std::vector<Trajectory> paths;
  std::vector<std::size_t> good;
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    if (loaded[i].trajectory) {
      paths.push_back(*loaded[i].trajectory);
      good.push_back(i);
    }
  }
  const auto estimates = infer(model, paths);

  std::ostringstream csv;
  csv << "file,theta_hat,sigma_sq_hat\n";
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    if (cursor < good.size() && good[cursor] == i) {
      csv << loaded[i].file << ',' << io::format_double(estimates[cursor][0]) << ','
          << io::format_double(estimates[cursor][1]) << '\n';
      ++cursor;
    } else {
      csv << loaded[i].file << ",nan,nan\n";
    }
  }
  std::ofstream out(out_dir / "estimates.csv");
  out << csv.str();
  std::cout << "inferred " << estimates.size() << "/" << loaded.size() << " paths -> "
            << (out_dir / "estimates.csv").string() << "\n";
  return estimates.empty() ? 1 : 0;
}

// ---------------------------------------------------------------------------

struct BenchmarkArgs {
  int paths = 500;
  double dt = 0.01;
  int steps = 500;
  double k = 30.0;
  int hops = 50;
  bool no_basinhop = false;
  std::string model_path;
};

int cmd_benchmark(const CLI::App& cmd, CommonArgs& common, const json& cfg,
                  BenchmarkArgs& args) {
  merge_common(cmd, cfg, common);
  merge(cmd, cfg, "--paths", "n_paths", args.paths);
  merge(cmd, cfg, "--dt", "dt", args.dt);
  merge(cmd, cfg, "--steps", "steps", args.steps);
  merge(cmd, cfg, "--k", "k", args.k);
  merge(cmd, cfg, "--hops", "basin_hops", args.hops);
  merge(cmd, cfg, "--no-basinhop", "no_basinhop", args.no_basinhop);
  merge(cmd, cfg, "--model", "model", args.model_path);

  BenchmarkConfig config;
  const auto regimes = make_regimes();
  config.regimes.assign(regimes.begin(), regimes.end());
  config.n_paths = args.paths;
  config.grid = GridSpec{args.dt, args.steps};
  config.k = args.k;
  config.master_seed = common.seed;
  config.threads = common.threads;
  config.mle.basin_hops = args.no_basinhop ? 0 : args.hops;

  std::optional<LstmModel> model;
  if (!args.model_path.empty()) {
    model = io::load_model(args.model_path);
    config.model = &*model;
  }
  try {
    config.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }

  json effective = common_json("benchmark", common);
  effective["n_paths"] = args.paths;
  effective["dt"] = args.dt;
  effective["steps"] = args.steps;
  effective["k"] = args.k;
  effective["basin_hops"] = args.hops;
  effective["no_basinhop"] = args.no_basinhop;
  effective["model"] = args.model_path;
  const fs::path out_dir(common.out);
  write_effective_config(out_dir, effective);

  const BenchmarkReport report = run_benchmark(config);

  io::write_report_markdown(out_dir / "report.md", report);
  io::write_report_csv(out_dir / "report.csv", report);
  io::write_report_json(out_dir / "report.json", report);
  io::write_estimates_csv(out_dir / "estimates.csv", report);
  io::write_timing_json(out_dir / "timing.json", report);

  double mle_wall = 0.0, rnn_wall = 0.0;
  for (const auto& row : report.regimes) {
    if (row.mle) mle_wall += row.mle->wall_time_total_s;
    if (row.rnn) rnn_wall += row.rnn->wall_time_total_s;
  }
  std::cout << "benchmark complete: " << report.regimes.size() << " regimes x " << args.paths
            << " paths\n";
  std::cout << "  mle wall time " << mle_wall << " s";
  if (model) std::cout << ", rnn wall time " << rnn_wall << " s";
  std::cout << "\n  reports -> " << (out_dir / "report.{md,csv,json}").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ornstein-Uhlenbeck parameter-estimation toolkit"};
  app.require_subcommand(1);

  CommonArgs common;
  std::vector<std::string> inputs;
  std::vector<std::string> manifests;
  SimulateArgs sim_args;
  FitArgs fit_args;
  TrainArgs train_args;
  BenchmarkArgs bench_args;
  std::string infer_model;

  CLI::App* simulate = app.add_subcommand("simulate", "Sample exact OU trajectories to CSV");
  add_common(*simulate, common);
  simulate->add_option("--theta", sim_args.theta, "Mean-reversion rate");
  simulate->add_option("--sigma-sq", sim_args.sigma_sq, "Instantaneous variance rate");
  simulate->add_option("--dt", sim_args.dt, "Grid spacing");
  simulate->add_option("--steps", sim_args.steps, "Transitions per path");
  simulate->add_option("--count", sim_args.count, "Number of paths");
  simulate->add_option("--k", sim_args.k, "Initial-value half-width multiple of sigma");
  simulate->add_option("--init", sim_args.init,
                       "Initial law: uniform_k_sigma | stationary | fixed");
  simulate->add_option("--x0", sim_args.x0, "Initial value for --init fixed");

  CLI::App* gmm = app.add_subcommand("gmm", "Moment-matched estimates for trajectory CSVs");
  add_common(*gmm, common);
  gmm->add_option("inputs", inputs, "Trajectory CSV files");

  CLI::App* fit = app.add_subcommand("fit", "Maximum-likelihood fits for trajectory CSVs");
  add_common(*fit, common);
  fit->add_option("inputs", inputs, "Trajectory CSV files");
  fit->add_option("--grad-tol", fit_args.grad_tol, "Gradient tolerance");
  fit->add_option("--max-iters", fit_args.max_iters, "BFGS iteration cap");
  fit->add_option("--hops", fit_args.hops, "Basin hops when stage III fires");
  fit->add_option("--hop-scale", fit_args.hop_scale, "Hop scale in log-parameter space");
  fit->add_option("--hop-temp", fit_args.hop_temp, "Metropolis temperature");
  fit->add_flag("--no-basinhop", fit_args.no_basinhop, "Disable stage III");
  fit->add_option("--manifest", fit_args.manifest_path, "Dataset manifest for truth columns");

  CLI::App* train_cmd = app.add_subcommand("train", "Train the LSTM regressor on a dataset");
  add_common(*train_cmd, common);
  train_cmd->add_option("--manifest", manifests, "Dataset manifest(s) with labeled files");
  train_cmd->add_option("--epochs", train_args.epochs, "Training epochs");
  train_cmd->add_option("--batch-size", train_args.batch_size, "Minibatch size");
  train_cmd->add_option("--lr", train_args.lr, "Adam learning rate");
  train_cmd->add_option("--hidden", train_args.hidden, "Hidden width per LSTM layer");
  train_cmd->add_option("--split", train_args.split, "Training fraction of the dataset");
  train_cmd->add_option("--delta", train_args.delta, "Huber threshold");
  train_cmd->add_option("--w-theta", train_args.w_theta, "Composite weight for theta");
  train_cmd->add_option("--w-sigma-sq", train_args.w_sigma_sq,
                        "Composite weight for sigma_sq");

  CLI::App* infer_cmd = app.add_subcommand("infer", "Run a trained model on trajectory CSVs");
  add_common(*infer_cmd, common);
  infer_cmd->add_option("--model", infer_model, "Model file from train");
  infer_cmd->add_option("inputs", inputs, "Trajectory CSV files");

  CLI::App* benchmark =
      app.add_subcommand("benchmark", "Regime-by-regime estimator comparison");
  add_common(*benchmark, common);
  benchmark->add_option("--paths", bench_args.paths, "Inference paths per regime");
  benchmark->add_option("--dt", bench_args.dt, "Grid spacing");
  benchmark->add_option("--steps", bench_args.steps, "Transitions per path");
  benchmark->add_option("--k", bench_args.k, "Initial-value half-width multiple");
  benchmark->add_option("--hops", bench_args.hops, "Basin hops when stage III fires");
  benchmark->add_flag("--no-basinhop", bench_args.no_basinhop, "Disable stage III");
  benchmark->add_option("--model", bench_args.model_path,
                        "Optional trained model for the RNN column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    const json cfg = load_config(common.config);
    if (cfg.contains("command") && cfg.at("command").get<std::string>() != active->get_name()) {
      throw UsageError("config file was written by '" +
                       cfg.at("command").get<std::string>() + "', not '" +
                       active->get_name() + "'");
    }

    if (active == simulate) return cmd_simulate(*simulate, common, cfg, sim_args);
    if (active == gmm) return cmd_gmm(*gmm, common, cfg, inputs);
    if (active == fit) return cmd_fit(*fit, common, cfg, fit_args, inputs);
    if (active == train_cmd) return cmd_train(*train_cmd, common, cfg, train_args, manifests);
    if (active == infer_cmd) return cmd_infer(*infer_cmd, common, cfg, infer_model, inputs);
    if (active == benchmark) return cmd_benchmark(*benchmark, common, cfg, bench_args);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
