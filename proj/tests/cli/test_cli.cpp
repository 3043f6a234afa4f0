#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "support/tempdir.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code = -1;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Result run(const fs::path& workdir, const std::string& args, const std::string& env = "") {
  const fs::path err = workdir.parent_path() / (workdir.filename().string() + ".stderr");
  const std::string cmd = env + " \"" EDAKD_CLI_PATH "\" --workdir \"" + workdir.string() + "\" " + args +
                          " >/dev/null 2>\"" + err.string() + "\"";
  const int rc = std::system(cmd.c_str());
  return {rc == -1 ? -1 : WEXITSTATUS(rc), slurp(err)};
}

std::vector<json> read_jsonl(const fs::path& p) {
  std::vector<json> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

std::map<std::string, std::string> outputs(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().filename().string().find("timing") == std::string::npos) {
      files[fs::relative(e.path(), root).string()] = slurp(e.path());
    }
  }
  return files;
}

// Independent count: floor((n - 512) / stride) + 1 windows per recording.
std::size_t expected_windows(double duration_s, double overlap) {
  const auto n = static_cast<long>(duration_s * 4.0);
  const auto stride = static_cast<long>(std::lround(512 * (1.0 - overlap)));
  return n < 512 ? 0 : static_cast<std::size_t>((n - 512) / stride + 1);
}

// One trained workspace shared by the slower tests. ctest runs each test in
// its own process, so the workspace is cached next to the test binary and
// rebuilt whenever the CLI binary changes.
std::string binary_stamp() {
  const fs::path cli(EDAKD_CLI_PATH);
  return std::to_string(fs::file_size(cli)) + ":" +
         std::to_string(fs::last_write_time(cli).time_since_epoch().count());
}

class Trained : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::path(EDAKD_CLI_WORK) / "trained";
    fs::create_directories(root_.parent_path());
    const fs::path stamp = root_.parent_path() / "trained.stamp";
    if (fs::exists(stamp) && slurp(stamp) == binary_stamp()) return;
    fs::remove_all(root_);
    fs::remove(stamp);
    const auto steps = {
        std::string("--seed 3 synth --subjects 6 --duration 600 --cohort-subjects 4 --ma-bank 10"),
        std::string("--seed 3 augment"),
        std::string("--seed 3 train-teacher --epochs 12 --limit 64"),
        std::string("--seed 3 distill --epochs 2 --limit 32"),
    };
    for (const auto& s : steps) {
      const auto r = run(root_, s);
      ASSERT_EQ(r.code, 0) << s << "\n" << r.err;
    }
    std::ofstream(stamp) << binary_stamp();
  }
  static inline fs::path root_;
};

TEST(CliSynth, EmitsExpectedFiles) {
  edakd::testing::TempDir d;
  const auto ws = d.path() / "ws";
  ASSERT_EQ(run(ws, "--seed 1 synth --subjects 3 --duration 300 --cohort-subjects 2 --ma-bank 4").code, 0);
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(ws / "data")) n += e.is_regular_file() ? 1 : 0;
  EXPECT_EQ(n, 5u);
  EXPECT_TRUE(fs::exists(ws / "logs" / "synth_timing.json"));
  EXPECT_EQ(read_jsonl(ws / "data" / "ma_bank.jsonl").size(), 4u);
}

TEST(CliSynth, SeededRerunIsBitIdentical) {
  edakd::testing::TempDir d;
  const std::string args = "--seed 9 synth --subjects 3 --duration 300 --cohort-subjects 2 --ma-bank 4";
  ASSERT_EQ(run(d.path() / "a", args).code, 0);
  ASSERT_EQ(run(d.path() / "b", args).code, 0);
  ASSERT_EQ(run(d.path() / "c", args + " --jobs 3").code, 0);
  const auto a = outputs(d.path() / "a");
  EXPECT_EQ(a, outputs(d.path() / "b"));
  EXPECT_EQ(a, outputs(d.path() / "c"));
  ASSERT_EQ(run(d.path() / "e", "--seed 10 synth --subjects 3 --duration 300 --cohort-subjects 2 --ma-bank 4").code, 0);
  EXPECT_NE(a.at("data/train.jsonl"), outputs(d.path() / "e").at("data/train.jsonl"));
}

TEST(CliSynth, SeedFallsBackToEnvironment) {
  edakd::testing::TempDir d;
  const std::string args = "synth --subjects 2 --duration 300 --cohort-subjects 2 --ma-bank 2";
  ASSERT_EQ(run(d.path() / "flag", "--seed 21 " + args).code, 0);
  ASSERT_EQ(run(d.path() / "env", args, "EDA_SEED=21").code, 0);
  EXPECT_EQ(outputs(d.path() / "flag"), outputs(d.path() / "env"));
  EXPECT_EQ(run(d.path() / "bad", args, "EDA_SEED=abc").code, 2);
}

TEST(CliSynth, CountsMatchWindowFormula) {
  edakd::testing::TempDir d;
  for (const auto& [duration, overlap] : {std::pair{300.0, 0.75}, {600.0, 0.75}, {500.0, 0.5}, {129.0, 0.0}}) {
    const auto ws = d.path() / ("w" + std::to_string(static_cast<int>(duration)) + "_" +
                                std::to_string(static_cast<int>(overlap * 100)));
    std::ostringstream args;
    args << "--seed 2 synth --subjects 5 --cohort-subjects 2 --ma-bank 2 --duration " << duration << " --overlap "
         << overlap;
    ASSERT_EQ(run(ws, args.str()).code, 0) << args.str();
    const auto summary = read_json(ws / "data" / "synth_summary.json");
    const auto per = expected_windows(duration, overlap);
    EXPECT_EQ(summary["windows_per_recording"].get<std::size_t>(), per);
    const auto train = read_jsonl(ws / "data" / "train.jsonl");
    const auto val = read_jsonl(ws / "data" / "val.jsonl");
    EXPECT_EQ(train.size() + val.size(), 5 * per);
    EXPECT_EQ(val.size(), 1 * per);  // round(0.8 * 5) = 4 train subjects
    for (const auto& r : train) EXPECT_EQ(r["samples"].size(), 512u);
  }
}

TEST(CliSynth, ExactCountsOnRequest) {
  edakd::testing::TempDir d;
  const auto ws = d.path() / "ws";
  ASSERT_EQ(run(ws, "--seed 4 synth --train-segments 40 --val-segments 10 --cohort-subjects 2 --ma-bank 2").code, 0);
  EXPECT_EQ(read_jsonl(ws / "data" / "train.jsonl").size(), 40u);
  EXPECT_EQ(read_jsonl(ws / "data" / "val.jsonl").size(), 10u);
  EXPECT_EQ(run(ws, "synth --train-segments 40").code, 2);
}

TEST(CliConfig, UnknownKeysAndRanges) {
  edakd::testing::TempDir d;
  const auto ws = d.path() / "ws";
  fs::create_directories(ws);
  const std::string args = "synth --subjects 2 --duration 300 --cohort-subjects 2 --ma-bank 2";
  std::ofstream(ws / "good.cfg") << "# comment\nseed = 5\nsynth.scr_rate_per_min = 2.5\naugment.snr_db_min = 22\n";
  std::ofstream(ws / "unknown.cfg") << "synth.bogus = 1\n";
  std::ofstream(ws / "wide.cfg") << "augment.snr_db_max = 40\n";
  std::ofstream(ws / "broken.cfg") << "seed = 1\nnovalue\n";
  EXPECT_EQ(run(ws, "--config good.cfg " + args).code, 0);
  const auto unknown = run(ws, "--config unknown.cfg " + args);
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.err.find("synth.bogus"), std::string::npos);
  EXPECT_EQ(run(ws, "--config wide.cfg " + args).code, 2);
  EXPECT_EQ(run(ws, "--config wide.cfg --allow-out-of-range " + args).code, 0);
  const auto broken = run(ws, "--config broken.cfg " + args);
  EXPECT_EQ(broken.code, 2);
  EXPECT_NE(broken.err.find(":2"), std::string::npos) << broken.err;
  EXPECT_EQ(run(ws, "--config missing.cfg " + args).code, 2);
  EXPECT_EQ(run(ws, "").code, 2);
  EXPECT_EQ(run(ws, "--jobs 0 " + args).code, 2);
}

TEST(CliAugment, PlansLoggedAndTargetsKept) {
  edakd::testing::TempDir d;
  const auto ws = d.path() / "ws";
  ASSERT_EQ(run(ws, "--seed 6 synth --subjects 3 --duration 300 --cohort-subjects 2 --ma-bank 4").code, 0);
  ASSERT_EQ(run(ws, "--seed 6 augment").code, 0);
  const auto clean = read_jsonl(ws / "data" / "val.jsonl");
  const auto noisy = read_jsonl(ws / "data" / "augmented.jsonl");
  const auto plans = read_jsonl(ws / "data" / "plans.jsonl");
  ASSERT_EQ(noisy.size(), clean.size());
  ASSERT_EQ(plans.size(), clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    EXPECT_EQ(noisy[i]["clean_samples"], clean[i]["samples"]);
    EXPECT_NE(noisy[i]["samples"], clean[i]["samples"]);
    EXPECT_EQ(noisy[i]["kind"], "augmented_input");
    EXPECT_EQ(plans[i]["index"], i);
  }
  const auto first = slurp(ws / "data" / "augmented.jsonl");
  ASSERT_EQ(run(ws, "--seed 6 --jobs 3 augment").code, 0);
  EXPECT_EQ(slurp(ws / "data" / "augmented.jsonl"), first);
}

TEST(CliTrain, TwoEpochSmokeAndResume) {
  edakd::testing::TempDir d;
  const auto ws = d.path() / "ws";
  ASSERT_EQ(run(ws, "--seed 8 synth --subjects 3 --duration 300 --cohort-subjects 2 --ma-bank 4").code, 0);
  const std::string common = "--seed 8 train-teacher --batch-size 8 --limit 16 ";
  ASSERT_EQ(run(ws, common + "--epochs 2 --out runs/full").code, 0);
  const auto full = read_jsonl(ws / "runs" / "full" / "teacher_log.jsonl");
  ASSERT_EQ(full.size(), 2u);
  EXPECT_TRUE(fs::exists(ws / "runs" / "full" / "teacher_best.edaw"));
  const auto summary = read_json(ws / "runs" / "full" / "teacher_summary.json");
  EXPECT_EQ(summary["epochs"], 2);
  EXPECT_EQ(summary["mode"], "teacher");

  ASSERT_EQ(run(ws, common + "--epochs 1 --out runs/part").code, 0);
  ASSERT_EQ(read_jsonl(ws / "runs" / "part" / "teacher_log.jsonl").size(), 1u);
  ASSERT_EQ(run(ws, common + "--epochs 2 --out runs/part --resume").code, 0);
  const auto resumed = read_jsonl(ws / "runs" / "part" / "teacher_log.jsonl");
  ASSERT_EQ(resumed.size(), 2u);
  for (const char* key : {"train_total", "val_mae", "val_snr_imp", "lr"}) {
    EXPECT_NEAR(resumed[1][key].get<double>(), full[1][key].get<double>(), 1e-9) << key;
  }
}

TEST(CliTrain, JobsDoNotChangeOutputs) {
  edakd::testing::TempDir d;
  const auto ws = d.path() / "ws";
  ASSERT_EQ(run(ws, "--seed 5 synth --subjects 3 --duration 300 --cohort-subjects 2 --ma-bank 4").code, 0);
  ASSERT_EQ(run(ws, "--seed 5 --jobs 1 train-teacher --epochs 1 --batch-size 8 --limit 16 --out runs/j1").code, 0);
  ASSERT_EQ(run(ws, "--seed 5 --jobs 3 train-teacher --epochs 1 --batch-size 8 --limit 16 --out runs/j3").code, 0);
  EXPECT_EQ(outputs(ws / "runs" / "j1"), outputs(ws / "runs" / "j3"));
}

TEST(CliDistill, NeedsTeacherWeights) {
  edakd::testing::TempDir d;
  const auto ws = d.path() / "ws";
  ASSERT_EQ(run(ws, "--seed 5 synth --subjects 3 --duration 300 --cohort-subjects 2 --ma-bank 4").code, 0);
  const auto r = run(ws, "distill --epochs 1 --limit 8 --teacher nowhere.edaw");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nowhere.edaw"), std::string::npos);
  ASSERT_EQ(run(ws, "distill --no-kd --epochs 1 --batch-size 8 --limit 8").code, 0);
  EXPECT_EQ(read_jsonl(ws / "runs" / "student" / "student_log.jsonl").size(), 1u);
}

TEST_F(Trained, DistillLogsComposedLoss) {
  const auto log = read_jsonl(root_ / "runs" / "student_kd" / "student_kd_log.jsonl");
  ASSERT_EQ(log.size(), 2u);
  const auto summary = read_json(root_ / "runs" / "student_kd" / "student_kd_summary.json");
  EXPECT_LE(summary["max_composition_error"].get<double>(), 1e-10);
  EXPECT_GT(log[0]["train_feature"].get<double>(), 0.0);
}

TEST_F(Trained, DenoisePreservesShape) {
  ASSERT_EQ(run(root_, "denoise --weights runs/teacher/teacher_best.edaw --input data/augmented.jsonl "
                       "--output out/noisy.jsonl").code, 0);
  const auto in = read_jsonl(root_ / "data" / "augmented.jsonl");
  const auto out = read_jsonl(root_ / "out" / "noisy.jsonl");
  ASSERT_EQ(in.size(), out.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    EXPECT_EQ(out[i]["samples"].size(), in[i]["samples"].size());
    EXPECT_EQ(out[i]["subject_id"], in[i]["subject_id"]);
  }
  const auto m = read_json(root_ / "out" / "noisy_metrics.json");
  EXPECT_EQ(m["per_segment"].size(), in.size());
}

TEST_F(Trained, DenoiseCsvKeepsLength) {
  {
    std::ofstream csv(root_ / "rec.csv");
    csv << "time_s,value_us\n";
    for (int i = 0; i < 700; ++i) csv << i * 0.25 << "," << 3.0 + 0.5 * std::sin(i * 0.01) << "\n";
  }
  ASSERT_EQ(run(root_, "denoise --weights runs/teacher/teacher_best.edaw --input rec.csv --output out/rec.csv").code, 0);
  std::ifstream in(root_ / "out" / "rec.csv");
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  while (std::getline(in, line)) rows += line.empty() ? 0 : 1;
  EXPECT_EQ(rows, 700u);
  std::ofstream(root_ / "short.csv") << "time_s,value_us\n0,1\n0.25,1\n";
  EXPECT_EQ(run(root_, "denoise --weights runs/teacher/teacher_best.edaw --input short.csv").code, 2);
}

TEST_F(Trained, DenoiseCleanInputStaysCloserThanNoisy) {
  ASSERT_EQ(run(root_, "denoise --weights runs/teacher/teacher_best.edaw --input data/augmented.jsonl "
                       "--output out/paired_noisy.jsonl").code, 0);
  ASSERT_EQ(run(root_, "denoise --weights runs/teacher/teacher_best.edaw --input data/val.jsonl "
                       "--output out/paired_clean.jsonl").code, 0);
  const auto clean = read_jsonl(root_ / "data" / "val.jsonl");
  const auto from_clean = read_jsonl(root_ / "out" / "paired_clean.jsonl");
  const auto noisy_metrics = read_json(root_ / "out" / "paired_noisy_metrics.json");
  double mae = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const auto a = clean[i]["samples"].get<std::vector<double>>();
    const auto b = from_clean[i]["samples"].get<std::vector<double>>();
    for (std::size_t k = 0; k < a.size(); ++k, ++n) mae += std::abs(a[k] - b[k]);
  }
  mae /= static_cast<double>(n);
  EXPECT_LT(mae, noisy_metrics["denoised"]["mae"].get<double>());
  EXPECT_LT(mae, noisy_metrics["input_baseline"]["mae"].get<double>());
}

TEST_F(Trained, DenoiseMissingWeightsIsUsageError) {
  const auto r = run(root_, "denoise --weights runs/none.edaw --input data/val.jsonl");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("none.edaw"), std::string::npos);
  EXPECT_EQ(run(root_, "denoise --input data/val.jsonl").code, 2);
}

TEST_F(Trained, ProfileTableAndLayerSums) {
  ASSERT_EQ(run(root_, "profile --weights runs/teacher/teacher_best.edaw --weights "
                       "runs/student_kd/student_kd_best.edaw --out out/prof").code, 0);
  const auto text = slurp(root_ / "out" / "prof.txt");
  EXPECT_NE(text.find("MACs"), std::string::npos);
  EXPECT_NE(text.find("FLOPs"), std::string::npos);
  const auto j = read_json(root_ / "out" / "prof.json");
  ASSERT_EQ(j["models"].size(), 2u);
  for (const auto& m : j["models"]) {
    std::uint64_t params = 0, macs = 0;
    for (const auto& l : m["layers"]) {
      params += l["params"].get<std::uint64_t>();
      macs += l["macs"].get<std::uint64_t>();
    }
    EXPECT_EQ(params, m["param_count"].get<std::uint64_t>());
    EXPECT_EQ(macs, m["macs"].get<std::uint64_t>());
    EXPECT_EQ(m["flops"].get<std::uint64_t>(), 2 * macs);
    const double mb = 4.0 * static_cast<double>(params) / 1048576.0;
    EXPECT_DOUBLE_EQ(m["size_mb"].get<double>(), mb);
  }
  const double ratio = j["flops_ratio"].get<double>();
  EXPECT_GE(ratio, 6.0);
  EXPECT_LE(ratio, 12.0);
}

TEST_F(Trained, EvaluateComparesMethodsDeterministically) {
  ASSERT_EQ(run(root_, "--seed 3 evaluate --out out/eval_a").code, 0);
  ASSERT_EQ(run(root_, "--seed 3 --jobs 3 evaluate --out out/eval_b").code, 0);
  EXPECT_EQ(slurp(root_ / "out" / "eval_a.json"), slurp(root_ / "out" / "eval_b.json"));
  EXPECT_EQ(slurp(root_ / "out" / "eval_a.csv"), slurp(root_ / "out" / "eval_b.csv"));
  EXPECT_EQ(slurp(root_ / "out" / "eval_a_folds.jsonl"), slurp(root_ / "out" / "eval_b_folds.jsonl"));
  const auto j = read_json(root_ / "out" / "eval_a.json");
  std::vector<std::string> names;
  for (const auto& m : j["methods"]) names.push_back(m["method"]);
  EXPECT_EQ(names, (std::vector<std::string>{"no-denoise", "exp-filter", "student", "teacher"}));
  const auto folds = read_jsonl(root_ / "out" / "eval_a_folds.jsonl");
  EXPECT_EQ(folds.size(), 4u * 4u);
}

TEST_F(Trained, DenoisedVariantsDoNotLoseAuroc) {
  ASSERT_EQ(run(root_, "--seed 3 evaluate --out out/eval_dir").code, 0);
  const auto j = read_json(root_ / "out" / "eval_dir.json");
  std::map<std::string, double> auroc;
  for (const auto& m : j["methods"]) auroc[m["method"]] = m["loso"]["macro"]["auroc"].get<double>();
  EXPECT_GE(auroc["exp-filter"], auroc["no-denoise"]);
  EXPECT_GE(auroc["teacher"], auroc["no-denoise"]);
}

TEST_F(Trained, MalformedCohortReportsLine) {
  const auto good = slurp(root_ / "data" / "cohort.jsonl");
  std::istringstream in(good);
  std::string l1, l2;
  std::getline(in, l1);
  std::getline(in, l2);
  std::ofstream(root_ / "bad_cohort.jsonl") << l1 << "\n" << l2 << "\n{\"subject_id\": 3\n";
  const auto r = run(root_, "evaluate --cohort bad_cohort.jsonl --out out/bad");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad_cohort.jsonl:3"), std::string::npos) << r.err;
}

}  // namespace
