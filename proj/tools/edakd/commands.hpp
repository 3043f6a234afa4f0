#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace edakd::cli {

struct SynthOptions {
  std::optional<std::size_t> subjects;
  std::optional<double> duration_s;
  std::optional<double> overlap;
  std::optional<std::size_t> train_segments;  // with val_segments: thin to exact counts
  std::optional<std::size_t> val_segments;
  std::optional<std::size_t> cohort_subjects;
  std::optional<std::size_t> ma_bank;
  std::filesystem::path out = "data";
};

struct AugmentOptions {
  std::filesystem::path input = "data/val.jsonl";
  std::filesystem::path bank = "data/ma_bank.jsonl";
  std::filesystem::path output = "data/augmented.jsonl";
  std::filesystem::path plans = "data/plans.jsonl";
};

struct TrainOptions {
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::size_t limit = 0;  // 0 keeps every training segment
  bool resume = false;
  bool no_kd = false;
  std::filesystem::path train = "data/train.jsonl";
  std::filesystem::path val = "data/val.jsonl";
  std::filesystem::path bank = "data/ma_bank.jsonl";
  std::filesystem::path teacher = "runs/teacher/teacher_best.edaw";
  std::filesystem::path out;  // default runs/<tag>
};

struct DenoiseOptions {
  std::filesystem::path weights;
  std::filesystem::path input;
  std::filesystem::path output;
};

struct ProfileOptions {
  std::vector<std::filesystem::path> weights;  // empty: freshly built teacher and student
  std::filesystem::path out = "out/profile";
};

struct EvaluateOptions {
  std::filesystem::path cohort = "data/cohort.jsonl";
  std::optional<std::filesystem::path> teacher;
  std::optional<std::filesystem::path> student;
  std::optional<double> target_specificity;
  std::filesystem::path out = "out/evaluation";
};

int cmd_synth(const Globals& g, const SynthOptions& o);
int cmd_augment(const Globals& g, const AugmentOptions& o);
int cmd_train_teacher(const Globals& g, const TrainOptions& o);
int cmd_distill(const Globals& g, const TrainOptions& o);
int cmd_denoise(const Globals& g, const DenoiseOptions& o);
int cmd_profile(const Globals& g, const ProfileOptions& o);
int cmd_evaluate(const Globals& g, const EvaluateOptions& o);

}  // namespace edakd::cli
