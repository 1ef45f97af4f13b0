#include "handsmooth/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <random>

#include "CLI11.hpp"

#include "handsmooth/autodiff.hpp"
#include "handsmooth/io.hpp"
#include "handsmooth/smoother.hpp"
#include "handsmooth/synth.hpp"

namespace handsmooth::cli {

namespace {

enum class LogLevel { quiet, info, debug };

LogLevel log_level() {
  const char* env = std::getenv("HANDSMOOTH_LOG");
  if (env == nullptr) return LogLevel::info;
  const std::string v(env);
  if (v == "quiet") return LogLevel::quiet;
  if (v == "debug") return LogLevel::debug;
  return LogLevel::info;
}

// Streams that are quiet below the configured level.
class Log {
 public:
  Log(std::ostream& err, LogLevel level) : err_(err), level_(level) {}
  std::ostream& info() { return level_ >= LogLevel::info ? err_ : null_; }
  std::ostream& debug() { return level_ >= LogLevel::debug ? err_ : null_; }
  std::ostream& error() { return err_; }

 private:
  std::ostream& err_;
  LogLevel level_;
  std::ostream null_{nullptr};
};

struct GenerateOptions {
  std::string motion_path;
  std::string noise_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::string model_path;
};

struct SmoothOptions {
  std::string in_path;
  std::string out_path;
  std::string report_path;
  SmootherConfig config;
};

struct EvalOptions {
  std::string pred_path;
  std::string gt_path;
  std::string json_path;
};

struct PerturbOptions {
  std::string in_path;
  std::string out_path;
  double range = 0.5;
  std::uint64_t seed = 0;
};

struct GradcheckOptions {
  int frames = 5;
  int views = 2;
  int seeds = 100;
  std::uint64_t first_seed = 0;
  double tolerance = 1e-4;
  double step = 1e-6;
};

int cmd_generate(const GenerateOptions& o, std::ostream& out, Log& log) {
  const MotionSpec motion = io::motion_spec_from_json(io::Json::parse(io::read_text(o.motion_path)));
  NoiseSpec noise = io::noise_spec_from_json(io::Json::parse(io::read_text(o.noise_path)));
  if (o.seed) noise.seed = *o.seed;

  io::SequenceFile file;
  if (!o.model_path.empty()) {
    file.skeleton = io::load_hand_model(o.model_path);
    file.model_ref.clear();
  }

  Rng motion_rng(derive_seed(noise.seed, 0));
  Rng corrupt_rng(derive_seed(noise.seed, 1));
  Rng render_rng(derive_seed(noise.seed, 2));
  GeneratedSequence gen = generate_sequence(motion, motion_rng);
  file.init = corrupt_trajectory(gen.ground_truth, noise, corrupt_rng);
  file.observations = render_observations(gen.ground_truth, gen.rig, file.skeleton, noise, render_rng);
  file.ground_truth = std::move(gen.ground_truth);
  file.validate();
  io::save_sequence(o.out_path, file);

  log.info() << "wrote " << o.out_path << ": " << file.num_frames() << " frames, " << file.rig().num_views()
             << " views, seed " << noise.seed << "\n";
  out << o.out_path << "\n";
  return kExitOk;
}

void write_report(const std::string& path, const LossReport& report) {
  if (path.empty()) return;
  if (std::filesystem::path(path).extension() == ".json") {
    io::write_text(path, io::dump(io::to_json(report)));
  } else {
    io::write_text(path, io::loss_report_csv(report));
  }
}

int cmd_smooth(const SmoothOptions& o, std::ostream& out, Log& log) {
  io::SequenceFile file = io::load_sequence(o.in_path);
  SmoothResult result;
  try {
    result = smooth(file.init, file.observations, file.skeleton, o.config, file.ground_truth);
  } catch (const Diverged& e) {
    write_report(o.report_path, e.report());
    throw;
  }
  const LossReport& report = result.report;
  for (const LossEntry& e : report.entries) {
    if (e.iteration % 50 == 0 || e.iteration == o.config.max_iters) {
      log.debug() << "iter " << e.iteration << " lr " << e.lr << " total " << e.total << "\n";
    }
  }
  if (report.non_improving) log.info() << "warning: final loss exceeds initial loss\n";

  file.init = result.refined;
  io::save_sequence(o.out_path, file);
  write_report(o.report_path, report);

  out << std::setprecision(10) << "loss " << report.entries.front().total << " -> " << report.entries.back().total
      << " after " << o.config.max_iters << " iterations\n";
  if (report.initial_metrics && report.final_metrics) {
    out << "mpjpe_mm " << report.initial_metrics->mpjpe_mm.value_or(0.0) << " -> "
        << report.final_metrics->mpjpe_mm.value_or(0.0) << "\n";
    out << "accel_error_mm " << report.initial_metrics->accel_error_mm << " -> "
        << report.final_metrics->accel_error_mm << "\n";
  }
  return kExitOk;
}

int cmd_eval(const EvalOptions& o, std::ostream& out, Log& log) {
  const io::SequenceFile pred = io::load_sequence(o.pred_path);
  std::optional<TrajectoryParams> gt;
  if (!o.gt_path.empty()) {
    const io::SequenceFile gt_file = io::load_sequence(o.gt_path);
    gt = gt_file.ground_truth ? *gt_file.ground_truth : gt_file.init;
  } else {
    gt = pred.ground_truth;
  }
  if (!gt) {
    log.error() << "eval: no ground truth in " << o.pred_path << " and no --gt given\n";
    return kExitUsage;
  }
  if (gt->num_frames() != pred.num_frames()) {
    log.error() << "eval: ground truth has " << gt->num_frames() << " frames, prediction has " << pred.num_frames()
                << "\n";
    return kExitUsage;
  }
  const MetricReport report = evaluate(pred.init, gt, pred.observations, pred.skeleton);
  out << io::metric_table(report);
  const std::string json = io::dump(io::to_json(report));
  if (o.json_path.empty()) {
    out << json;
  } else {
    io::write_text(o.json_path, json);
  }
  return kExitOk;
}

int cmd_perturb(const PerturbOptions& o, std::ostream& out, Log& log) {
  io::SequenceFile file = io::load_sequence(o.in_path);
  Rng rng(o.seed);
  file.observations.rig = perturb_rig(file.observations.rig, rng, o.range);
  io::save_sequence(o.out_path, file);
  log.info() << "perturbed " << file.rig().num_views() << " views by up to " << o.range << " m\n";
  out << o.out_path << "\n";
  return kExitOk;
}

int cmd_gradcheck(const GradcheckOptions& o, std::ostream& out, Log& log) {
  const HandSkeleton skeleton = HandSkeleton::right_hand();
  double worst = 0.0;
  int failures = 0;
  for (int i = 0; i < o.seeds; ++i) {
    const std::uint64_t seed = o.first_seed + static_cast<std::uint64_t>(i);
    const RandomProblem p = random_problem(o.frames, o.views, seed);
    const Objective objective(skeleton, p.obs);
    const double err = ad::check_gradient(objective, p.params.flatten(), o.step, p.scale);
    const bool ok = err < o.tolerance;
    if (!ok) ++failures;
    worst = std::isnan(err) || std::isnan(worst) ? std::numeric_limits<double>::quiet_NaN() : std::max(worst, err);
    log.debug() << "seed " << seed << " max_rel_err " << io::format_double(err) << (ok ? "" : " FAIL") << "\n";
  }
  out << "gradcheck: " << o.seeds << " instances, frames " << o.frames << ", views " << o.views << ", step "
      << io::format_double(o.step) << "\n";
  out << "max_rel_err " << io::format_double(worst) << " tolerance " << io::format_double(o.tolerance) << " -> "
      << (failures == 0 ? "PASS" : "FAIL") << " (" << failures << " failing)\n";
  return failures == 0 ? kExitOk : kExitNumerical;
}

ReprojectionNorm parse_norm(const std::string& s) {
  if (s == "l2") return ReprojectionNorm::l2;
  if (s == "l2_squared") return ReprojectionNorm::l2_squared;
  return ReprojectionNorm::l1;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Log log(err, log_level());

  CLI::App app{"Offline refinement of hand pose trajectories against multi-view 2D landmarks"};
  app.require_subcommand(1);

  GenerateOptions gen;
  std::uint64_t gen_seed = 0;
  CLI::App* generate = app.add_subcommand("generate", "Synthesize a benchmark sequence file");
  generate->add_option("motion", gen.motion_path, "Motion spec JSON")->required()->check(CLI::ExistingFile);
  generate->add_option("noise", gen.noise_path, "Noise spec JSON")->required()->check(CLI::ExistingFile);
  generate->add_option("out", gen.out_path, "Output sequence file")->required();
  CLI::Option* seed_opt = generate->add_option("--seed", gen_seed, "Overrides the noise spec seed");
  generate->add_option("--model", gen.model_path, "Hand model JSON (default: built-in)")->check(CLI::ExistingFile);

  SmoothOptions sm;
  std::string norm = "l2";
  CLI::App* smooth_cmd = app.add_subcommand("smooth", "Refine the trajectory of a sequence file");
  smooth_cmd->add_option("in", sm.in_path, "Input sequence file")->required()->check(CLI::ExistingFile);
  smooth_cmd->add_option("out", sm.out_path, "Output sequence file")->required();
  smooth_cmd->add_option("--lr", sm.config.learning_rate, "Initial learning rate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  smooth_cmd->add_option("--lr-min", sm.config.lr_min, "Final learning rate of the cosine schedule")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  smooth_cmd->add_option("--iters", sm.config.max_iters, "Number of AdamW iterations")
      ->capture_default_str()
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  smooth_cmd->add_option("--lambda-pose", sm.config.weights.pose)->capture_default_str()->check(CLI::NonNegativeNumber);
  smooth_cmd->add_option("--lambda-orients", sm.config.weights.orients)
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  smooth_cmd->add_option("--lambda-position", sm.config.weights.position)
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  smooth_cmd->add_option("--lambda-2d", sm.config.weights.reprojection)
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  smooth_cmd->add_option("--weight-decay", sm.config.weight_decay)->capture_default_str()->check(CLI::NonNegativeNumber);
  smooth_cmd->add_option("--beta1", sm.config.adam_beta1)->capture_default_str()->check(CLI::Range(0.0, 0.999999999));
  smooth_cmd->add_option("--beta2", sm.config.adam_beta2)->capture_default_str()->check(CLI::Range(0.0, 0.999999999));
  smooth_cmd->add_option("--eps", sm.config.adam_eps)->capture_default_str()->check(CLI::PositiveNumber);
  smooth_cmd->add_flag("--optimize-shape", sm.config.optimize_shape, "Also refine the shared shape");
  smooth_cmd->add_option("--norm", norm, "2D penalty")
      ->capture_default_str()
      ->check(CLI::IsMember({"l2", "l2_squared", "l1"}));
  smooth_cmd->add_option("--seed", sm.config.seed, "Recorded in the config; the loop is deterministic");
  smooth_cmd->add_option("--report", sm.report_path, "Loss report (.json for JSON, CSV otherwise)");

  EvalOptions ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Score a sequence file against ground truth");
  eval_cmd->add_option("pred", ev.pred_path, "Sequence file whose trajectory is scored")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--gt", ev.gt_path, "Sequence file holding the ground truth (default: pred's own)")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--json", ev.json_path, "Write the metric report JSON here instead of stdout");

  PerturbOptions pt;
  CLI::App* perturb_cmd = app.add_subcommand("perturb", "Add uniform noise to every camera translation");
  perturb_cmd->add_option("in", pt.in_path, "Input sequence file")->required()->check(CLI::ExistingFile);
  perturb_cmd->add_option("out", pt.out_path, "Output sequence file")->required();
  perturb_cmd->add_option("--range", pt.range, "Half-width of the uniform noise, meters")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  perturb_cmd->add_option("--seed", pt.seed)->capture_default_str();

  GradcheckOptions gc;
  CLI::App* gradcheck_cmd = app.add_subcommand("gradcheck", "Compare reverse-mode and finite-difference gradients");
  gradcheck_cmd->add_option("--frames", gc.frames)->capture_default_str()->check(CLI::Range(3, 100000));
  gradcheck_cmd->add_option("--views", gc.views)->capture_default_str()->check(CLI::Range(1, 1000));
  gradcheck_cmd->add_option("--seeds", gc.seeds, "Number of random instances")
      ->capture_default_str()
      ->check(CLI::Range(1, 1000000));
  gradcheck_cmd->add_option("--first-seed", gc.first_seed)->capture_default_str();
  gradcheck_cmd->add_option("--tolerance", gc.tolerance)->capture_default_str()->check(CLI::PositiveNumber);
  gradcheck_cmd->add_option("--step", gc.step, "Central-difference step")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  std::string model_out;
  CLI::App* model_cmd = app.add_subcommand("model", "Write the built-in hand model as JSON");
  model_cmd->add_option("out", model_out)->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    log.error() << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (generate->parsed()) {
      if (seed_opt->count() > 0) gen.seed = gen_seed;
      return cmd_generate(gen, out, log);
    }
    if (smooth_cmd->parsed()) {
      sm.config.norm = parse_norm(norm);
      return cmd_smooth(sm, out, log);
    }
    if (eval_cmd->parsed()) return cmd_eval(ev, out, log);
    if (perturb_cmd->parsed()) return cmd_perturb(pt, out, log);
    if (gradcheck_cmd->parsed()) return cmd_gradcheck(gc, out, log);
    if (model_cmd->parsed()) {
      io::write_text(model_out, io::dump(io::to_json(HandSkeleton::right_hand())));
      return kExitOk;
    }
  } catch (const SchemaError& e) {
    log.error() << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    log.error() << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SpecError& e) {
    log.error() << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    log.error() << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Diverged& e) {
    log.error() << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DegenerateObservation& e) {
    log.error() << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ad::DomainError& e) {
    log.error() << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    log.error() << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace handsmooth::cli
