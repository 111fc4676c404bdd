#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sparsewalk/config.hpp"
#include "sparsewalk/evalharness.hpp"
#include "sparsewalk/learn/checkpoint.hpp"
#include "sparsewalk/parallel.hpp"
#include "sparsewalk/raysensor.hpp"
#include "sparsewalk/trainer.hpp"

namespace sparsewalk::cli {

namespace fs = std::filesystem;

namespace {

struct TrainOptions {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int max_updates = 0;
  int threads = 0;
  bool warmup_only = false;
  bool uniform = false;
};

struct EvalOptions {
  std::string checkpoint;
  std::string config;
  std::string out;
  std::vector<std::string> suites;
  std::uint64_t seed = 0;
  int trials = evalharness::kDefaultTrials;
  double noise_sigma = 0.0;
  std::string ablate_rays;
  int threads = 0;
  bool record = false;
};

struct RayDesignOptions {
  double height = 0.5;
  double foot = 0.055;
  double fov_deg = 60.0;
};

struct RolloutOptions {
  std::string checkpoint;
  std::string config;
  std::string out;
  std::string terrain = "flat";
  double v_ref = 0.5;
  double noise_sigma = 0.0;
  std::string ablate_rays;
  std::uint64_t seed = 0;
};

std::string output_dir(const std::string& flag) {
  if (!flag.empty()) {
    return flag;
  }
  if (const char* env = std::getenv(kOutEnv); env && *env) {
    return env;
  }
  return "sparsewalk_out";
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
  }
  return fs::path(dir);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  file << text;
  if (!file) {
    throw std::runtime_error("cannot write " + path.string());
  }
}

std::string header_line(const std::string& command, std::uint64_t hash, std::uint64_t seed) {
  return "# sparsewalk " + command + " config_hash=" + hex64(hash) +
         " seed=" + std::to_string(seed) + "\n";
}

RunConfig base_config(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

RunConfig checkpoint_config(const std::string& config_path, const std::string& checkpoint) {
  if (!config_path.empty()) {
    return load_run_config(config_path);
  }
  if (!fs::exists(checkpoint)) {
    throw ConfigError(checkpoint, "checkpoint file not found");
  }
  return run_config_from_json(learn::read_checkpoint_config(checkpoint));
}

raysensor::RayMask ray_mask(const std::string& text, int n_rays) {
  try {
    return raysensor::parse_ray_list(text, n_rays);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("--ablate-rays", e.what());
  }
}

int cmd_train(const TrainOptions& opt, const CLI::App& sub, std::ostream& out) {
  RunConfig cfg = base_config(opt.config);
  if (sub.count("--seed")) {
    cfg.seed = opt.seed;
  }
  if (sub.count("--max-updates")) {
    cfg.train.max_updates = opt.max_updates;
  }
  if (sub.count("--threads")) {
    cfg.train.threads = opt.threads;
  }
  if (opt.warmup_only) {
    cfg.train.warmup_only = true;
  }
  if (opt.uniform) {
    cfg.train.curriculum.uniform_baseline = true;
  }
  validate(cfg);

  const fs::path dir = prepare_dir(output_dir(opt.out));
  const std::string config_text = to_json(cfg);
  const std::uint64_t hash = config_hash(cfg);
  write_file(dir / "config.json", config_text);

  std::ofstream log(dir / "train_log.csv", std::ios::binary | std::ios::trunc);
  if (!log) {
    throw std::runtime_error("cannot write " + (dir / "train_log.csv").string());
  }
  log << header_line("train", hash, cfg.seed) << train_log_header() << '\n';

  Trainer trainer(cfg.train, cfg.seed);
  out << "training: config_hash=" << hex64(hash) << " seed=" << cfg.seed
      << " output=" << dir.string() << '\n';
  while (!trainer.finished()) {
    const UpdateLog entry = trainer.iterate();
    log << train_log_row(entry) << '\n';
    log.flush();
    out << "update " << entry.update << " stage=" << entry.stage
        << " return=" << entry.mean_return << " noise=" << entry.stats.policy_noise << '\n';
    if (entry.event != curriculum::Curriculum::Event::None) {
      const fs::path ck = dir / ("checkpoint_" + entry.stage + ".swck");
      learn::save_checkpoint(ck.string(), trainer.params(), config_text);
      out << "stage " << entry.stage << " complete -> " << ck.string() << '\n';
    }
  }
  if (!log) {
    throw std::runtime_error("cannot write training log");
  }
  const fs::path final_ck = dir / "checkpoint_final.swck";
  learn::save_checkpoint(final_ck.string(), trainer.params(), config_text);
  out << "final checkpoint -> " << final_ck.string() << '\n';
  return kOk;
}

int cmd_eval(const EvalOptions& opt, const CLI::App& sub, std::ostream& out) {
  RunConfig cfg = checkpoint_config(opt.config, opt.checkpoint);
  if (sub.count("--seed")) {
    cfg.seed = opt.seed;
  }
  if (sub.count("--threads")) {
    cfg.train.threads = opt.threads;
  }
  cfg.eval.trials = opt.trials;
  if (!opt.suites.empty()) {
    cfg.eval.suites = opt.suites;
  }
  validate(cfg);

  evalharness::SuiteOverrides overrides;
  if (sub.count("--noise-sigma")) {
    if (!(opt.noise_sigma >= 0.0)) {
      throw ConfigError("--noise-sigma", "must be non-negative");
    }
    overrides.noise_sigma = opt.noise_sigma;
  }
  if (sub.count("--ablate-rays")) {
    overrides.ablation = ray_mask(opt.ablate_rays, cfg.train.env.rays.n_rays);
  }

  const learn::Checkpoint ck = learn::load_checkpoint(opt.checkpoint, cfg.train.layout);
  const evalharness::PolicyFn policy = evalharness::mean_policy(ck.params);
  const fs::path dir = prepare_dir(output_dir(opt.out));
  const std::uint64_t hash = config_hash(cfg);
  const int threads = resolve_threads(cfg.train.threads);

  for (const std::string& name : cfg.eval.suites) {
    const auto kind = evalharness::suite_from_string(name);
    if (!kind) {
      throw ConfigError("eval.suites", "unknown suite '" + name + "'");
    }
    const evalharness::Suite suite =
        evalharness::apply_overrides(evalharness::make_suite(*kind, cfg.eval.trials), overrides);
    std::string record_dir;
    if (opt.record) {
      record_dir = prepare_dir((dir / "records").string()).string();
    }
    const evalharness::SuiteResult result =
        evalharness::run_suite(policy, cfg.train.env, suite, cfg.seed, threads, {}, record_dir);
    const std::string table = evalharness::table_csv(result);
    write_file(dir / ("eval_" + name + ".csv"), header_line("eval", hash, cfg.seed) + table);

    nlohmann::ordered_json report;
    report["config_hash"] = hex64(hash);
    report["seed"] = cfg.seed;
    report["checkpoint"] = fs::path(opt.checkpoint).filename().string();
    report["result"] = nlohmann::ordered_json::parse(evalharness::report_json(result));
    write_file(dir / ("eval_" + name + ".json"), report.dump(2) + "\n");
    out << "# suite " << name << '\n' << table;
  }
  return kOk;
}

int cmd_raydesign(const RayDesignOptions& opt, std::ostream& out) {
  if (!(opt.height > 0.0)) {
    throw ConfigError("--height", "must be positive");
  }
  if (!(opt.foot > 0.0)) {
    throw ConfigError("--foot", "must be positive");
  }
  if (!(opt.fov_deg > 0.0 && opt.fov_deg < 180.0)) {
    throw ConfigError("--fov", "must be in (0, 180) degrees");
  }
  const double fov = opt.fov_deg * kPi / 180.0;
  const int n = raysensor::min_ray_count(opt.height, opt.foot, fov);
  std::ostringstream args;
  args << std::setprecision(17) << opt.height << ',' << opt.foot << ',' << opt.fov_deg;
  out << "# sparsewalk raydesign config_hash=" << hex64(fnv1a64(args.str())) << " seed=0\n";
  out << std::setprecision(17);
  out << "N=" << n << '\n';
  out << "ray,angle_deg,intercept_m,gap_m\n";
  for (const auto& row : raysensor::ray_design_table(opt.height, n, fov)) {
    out << row.ray << ',' << row.angle * 180.0 / kPi << ',' << row.intercept << ',' << row.gap
        << '\n';
  }
  return kOk;
}

int cmd_rollout(const RolloutOptions& opt, const CLI::App& sub, std::ostream& out) {
  RunConfig cfg = checkpoint_config(opt.config, opt.checkpoint);
  if (sub.count("--seed")) {
    cfg.seed = opt.seed;
  }
  validate(cfg);
  const auto kind = terrain::terrain_kind_from_string(opt.terrain);
  if (!kind) {
    throw ConfigError("--terrain", "unknown terrain '" + opt.terrain + "'");
  }
  evalharness::SuiteEntry entry;
  entry.label = opt.terrain;
  entry.kind = *kind;
  entry.v_ref_x = opt.v_ref;
  entry.noise_sigma = opt.noise_sigma;
  entry.n_trials = 1;
  if (sub.count("--ablate-rays")) {
    entry.ablation = ray_mask(opt.ablate_rays, cfg.train.env.rays.n_rays);
  }

  Rng rng = make_rng(cfg.seed, 7);
  const evalharness::TrialSpec spec = evalharness::make_trial(entry, {}, rng);
  try {
    env::validate(spec.task);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("--v-ref", e.what());
  }
  const learn::Checkpoint ck = learn::load_checkpoint(opt.checkpoint, cfg.train.layout);
  std::vector<env::TraceRow> trace;
  const evalharness::TrialResult result =
      evalharness::run_trial(evalharness::mean_policy(ck.params), cfg.train.env, spec, &trace);

  const fs::path dir = prepare_dir(output_dir(opt.out));
  const fs::path file = dir / ("rollout_" + opt.terrain + ".csv");
  write_file(file, header_line("rollout", config_hash(cfg), cfg.seed) + env::trace_csv(trace));
  out << "rollout " << opt.terrain << " v_ref=" << opt.v_ref
      << " success=" << (result.success ? 1 : 0)
      << " reason=" << env::to_string(result.reason) << " steps=" << result.steps
      << " distance=" << result.distance << " -> " << file.string() << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse-ray quadruped locomotion: training, evaluation and tools", "sparsewalk"};
  app.require_subcommand(1);

  TrainOptions train;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a policy with the curriculum");
  train_cmd->add_option("-c,--config", train.config, "JSON run configuration");
  train_cmd->add_option("-o,--out", train.out, "Output directory");
  train_cmd->add_option("--seed", train.seed, "Master seed (overrides the config)");
  train_cmd->add_option("--max-updates", train.max_updates, "Update budget (overrides the config)");
  train_cmd->add_option("--threads", train.threads, "Worker threads, 0 for all cores");
  train_cmd->add_flag("--warmup-only", train.warmup_only, "Stop after the warm-up stage");
  train_cmd->add_flag("--uniform", train.uniform, "Uniform task sampling baseline");

  EvalOptions eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the test suites");
  eval_cmd->add_option("checkpoint", eval.checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("-c,--config", eval.config, "JSON run configuration");
  eval_cmd->add_option("-s,--suite", eval.suites, "seen, noise, ablation or unseen");
  eval_cmd->add_option("-o,--out", eval.out, "Output directory");
  eval_cmd->add_option("--seed", eval.seed, "Master seed (overrides the config)");
  eval_cmd->add_option("--trials", eval.trials, "Trials per row")->capture_default_str();
  eval_cmd->add_option("--noise-sigma", eval.noise_sigma, "Ray noise for every trial");
  eval_cmd->add_option("--ablate-rays", eval.ablate_rays, "Rays to ablate, e.g. 8,9,10,11");
  eval_cmd->add_option("--threads", eval.threads, "Worker threads, 0 for all cores");
  eval_cmd->add_flag("--record", eval.record, "Write per-trial rollout CSV files");

  RayDesignOptions design;
  CLI::App* design_cmd = app.add_subcommand("raydesign", "Minimum ray count design guide");
  design_cmd->add_option("--height", design.height, "Sensor height [m]")->capture_default_str();
  design_cmd->add_option("--foot", design.foot, "Effective foot size [m]")->capture_default_str();
  design_cmd->add_option("--fov", design.fov_deg, "Field of view [deg]")->capture_default_str();

  RolloutOptions rollout;
  CLI::App* rollout_cmd = app.add_subcommand("rollout", "Record one deterministic rollout");
  rollout_cmd->add_option("checkpoint", rollout.checkpoint, "Checkpoint file")->required();
  rollout_cmd->add_option("-c,--config", rollout.config, "JSON run configuration");
  rollout_cmd->add_option("-o,--out", rollout.out, "Output directory");
  rollout_cmd->add_option("--terrain", rollout.terrain, "Terrain kind")->capture_default_str();
  rollout_cmd->add_option("--v-ref", rollout.v_ref, "Reference velocity [m/s]")
      ->capture_default_str();
  rollout_cmd->add_option("--noise-sigma", rollout.noise_sigma, "Ray noise");
  rollout_cmd->add_option("--ablate-rays", rollout.ablate_rays, "Rays to ablate");
  rollout_cmd->add_option("--seed", rollout.seed, "Master seed (overrides the config)");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (train_cmd->parsed()) {
      return cmd_train(train, *train_cmd, out);
    }
    if (eval_cmd->parsed()) {
      return cmd_eval(eval, *eval_cmd, out);
    }
    if (design_cmd->parsed()) {
      return cmd_raydesign(design, out);
    }
    return cmd_rollout(rollout, *rollout_cmd, out);
  } catch (const DivergenceError& e) {
    err << "error: training diverged: " << e.what() << '\n';
    return kDivergence;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ShapeMismatchError& e) {
    err << "error: shape mismatch: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, out, err);
}

}  // namespace sparsewalk::cli
