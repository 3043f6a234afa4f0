#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "commands.hpp"
#include "edakd/errors.hpp"
#include "output.hpp"

namespace fs = std::filesystem;
using namespace edakd;
using namespace edakd::cli;

namespace {

constexpr int kExitNumeric = 1;
constexpr int kExitUsage = 2;

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("EDA_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  const std::string text(raw);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("EDA_SEED is not a non-negative integer: " + text);
  }
  return v;
}

void add_train_options(CLI::App* cmd, TrainOptions& o) {
  cmd->add_option("--epochs", o.epochs, "total epochs (overrides optim.epochs)");
  cmd->add_option("--batch-size", o.batch_size, "batch size (overrides optim.batch_size)");
  cmd->add_option("--limit", o.limit, "use only the first N training segments");
  cmd->add_flag("--resume", o.resume, "continue from saved state in the output directory");
  cmd->add_option("--train", o.train, "training segments (JSONL)");
  cmd->add_option("--val", o.val, "validation segments (JSONL)");
  cmd->add_option("--bank", o.bank, "motion-artifact bank (JSONL); colored noise only when absent");
  cmd->add_option("--out", o.out, "output directory (default runs/<tag>)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EDA denoising with knowledge distillation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string workdir = ".";
  std::optional<std::uint64_t> seed_flag;
  std::optional<int> jobs_flag;
  std::optional<std::string> config_path;
  bool allow_out_of_range = false;
  app.add_option("--workdir", workdir, "directory all relative paths refer to");
  app.add_option("--seed", seed_flag, "master seed (falls back to EDA_SEED, then the config file)");
  app.add_option("--jobs", jobs_flag, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--config", config_path, "flat key=value configuration file");
  app.add_flag("--allow-out-of-range", allow_out_of_range, "accept augmentation ranges outside the defaults");

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "write train/val segments, an MA bank and an evaluation cohort");
  c_synth->add_option("--subjects", synth.subjects, "synthetic subjects");
  c_synth->add_option("--duration", synth.duration_s, "recording length per subject (s)");
  c_synth->add_option("--overlap", synth.overlap, "window overlap in [0, 1)");
  c_synth->add_option("--train-segments", synth.train_segments, "exact train count (needs --val-segments)");
  c_synth->add_option("--val-segments", synth.val_segments, "exact val count (needs --train-segments)");
  c_synth->add_option("--cohort-subjects", synth.cohort_subjects, "subjects in the evaluation cohort");
  c_synth->add_option("--ma-bank", synth.ma_bank, "motion-artifact bank entries");
  c_synth->add_option("--out", synth.out, "output directory");

  AugmentOptions augment;
  auto* c_augment = app.add_subcommand("augment", "corrupt clean segments under logged per-segment plans");
  c_augment->add_option("--input", augment.input, "clean segments (JSONL)");
  c_augment->add_option("--bank", augment.bank, "motion-artifact bank (JSONL)");
  c_augment->add_option("--output", augment.output, "noisy segments with clean targets (JSONL)");
  c_augment->add_option("--plans", augment.plans, "plan log (JSONL)");

  TrainOptions teacher;
  auto* c_teacher = app.add_subcommand("train-teacher", "train the teacher U-Net");
  add_train_options(c_teacher, teacher);

  TrainOptions distill;
  auto* c_distill = app.add_subcommand("distill", "train the student, with distillation unless --no-kd");
  add_train_options(c_distill, distill);
  c_distill->add_option("--teacher", distill.teacher, "teacher weights");
  c_distill->add_flag("--no-kd", distill.no_kd, "reconstruction loss only");

  DenoiseOptions denoise;
  auto* c_denoise = app.add_subcommand("denoise", "denoise JSONL segments or a CSV recording");
  c_denoise->add_option("--weights", denoise.weights, "model weights")->required();
  c_denoise->add_option("--input", denoise.input, "JSONL segments or CSV signal")->required();
  c_denoise->add_option("--output", denoise.output, "output file");

  ProfileOptions profile;
  auto* c_profile = app.add_subcommand("profile", "parameter, size and MAC/FLOP table");
  c_profile->add_option("--weights", profile.weights, "weights to profile (default: configured teacher and student)");
  c_profile->add_option("--out", profile.out, "output prefix (.json and .txt)");

  EvaluateOptions evaluate;
  auto* c_evaluate = app.add_subcommand("evaluate", "LOSO comparison of denoising methods on a cohort");
  c_evaluate->add_option("--cohort", evaluate.cohort, "cohort file (JSONL)");
  c_evaluate->add_option("--teacher", evaluate.teacher, "teacher weights");
  c_evaluate->add_option("--student", evaluate.student, "student weights");
  c_evaluate->add_option("--target-specificity", evaluate.target_specificity, "threshold specificity target");
  c_evaluate->add_option("--out", evaluate.out, "output prefix (.json, .csv, _folds.jsonl)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    Globals g;
    g.workdir = workdir;
    g.allow_out_of_range = allow_out_of_range;
    if (config_path) g.config = RunConfig::load(g.path(*config_path), allow_out_of_range);
    if (seed_flag) {
      g.seed = *seed_flag;
    } else if (auto s = env_seed()) {
      g.seed = *s;
    } else {
      g.seed = g.config.seed().value_or(0);
    }
    g.jobs = jobs_flag.value_or(g.config.jobs().value_or(1));
    if (g.jobs < 1) throw ConfigError("jobs must be at least 1");
    fs::create_directories(g.workdir);

    auto* cmd = app.get_subcommands().front();
    TimingSidecar timing(g.workdir, cmd->get_name());
    if (cmd == c_synth) return cmd_synth(g, synth);
    if (cmd == c_augment) return cmd_augment(g, augment);
    if (cmd == c_teacher) return cmd_train_teacher(g, teacher);
    if (cmd == c_distill) return cmd_distill(g, distill);
    if (cmd == c_denoise) return cmd_denoise(g, denoise);
    if (cmd == c_profile) return cmd_profile(g, profile);
    if (cmd == c_evaluate) return cmd_evaluate(g, evaluate);
    return kExitUsage;
  } catch (const TrainingDiverged& e) {
    std::cerr << "edakd: training diverged: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const InferenceError& e) {
    std::cerr << "edakd: numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "edakd: error: " << e.what() << '\n';
    return kExitUsage;
  }
}
