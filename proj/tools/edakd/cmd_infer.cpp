#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "commands.hpp"
#include "edakd/errors.hpp"
#include "edakd/evaluate/cohort.hpp"
#include "edakd/evaluate/loso.hpp"
#include "edakd/evaluate/metrics.hpp"
#include "edakd/models/archive.hpp"
#include "edakd/models/inference.hpp"
#include "edakd/models/profile.hpp"
#include "edakd/parallel.hpp"
#include "edakd/signal/io.hpp"
#include "output.hpp"

namespace edakd::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

models::ModelGraph load_weights(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("weights file not found: " + path.string());
  return models::load_model(path);
}

ordered_json metrics_json(const evaluate::ReconMetrics& m) {
  ordered_json j;
  j["mae"] = m.mae;
  j["rmse"] = m.rmse;
  j["pcc"] = m.pcc;
  j["snr_imp_db"] = m.snr_imp_db;
  return j;
}

struct MetricsMean {
  evaluate::ReconMetrics sum;
  std::size_t n = 0;

  void add(const evaluate::ReconMetrics& m) {
    sum.mae += m.mae, sum.rmse += m.rmse, sum.pcc += m.pcc, sum.snr_imp_db += m.snr_imp_db;
    ++n;
  }
  ordered_json json() const {
    const double d = n == 0 ? 1.0 : static_cast<double>(n);
    auto j = metrics_json({sum.mae / d, sum.rmse / d, sum.pcc / d, sum.snr_imp_db / d});
    j["segments"] = n;
    return j;
  }
};

fs::path sibling(const fs::path& p, const std::string& suffix) {
  return p.parent_path() / (p.stem().string() + suffix);
}

int denoise_csv(const Globals& g, const models::ModelGraph& model, const fs::path& in, const fs::path& out) {
  auto sig = signal::read_signal_csv(in, in.stem().string());
  if (sig.rate_hz != signal::kSegmentRateHz) sig = signal::downsample(sig, signal::kSegmentRateHz);
  const std::size_t n = sig.samples.size();
  auto starts = signal::window_starts(n, signal::kSegmentLength, 0.0);
  if (starts.empty()) throw ConfigError(in.string() + ": shorter than one 128 s segment");
  if (starts.back() + signal::kSegmentLength < n) starts.push_back(n - signal::kSegmentLength);

  std::vector<std::vector<double>> inputs;
  for (auto s : starts) {
    inputs.emplace_back(sig.samples.begin() + static_cast<std::ptrdiff_t>(s),
                        sig.samples.begin() + static_cast<std::ptrdiff_t>(s + signal::kSegmentLength));
  }
  const auto outputs = models::denoise_all(model, inputs, g.jobs);
  // Later windows overwrite the overlap of earlier ones.
  signal::SampledSignal result = sig;
  for (std::size_t w = 0; w < starts.size(); ++w) {
    std::copy(outputs[w].begin(), outputs[w].end(), result.samples.begin() + static_cast<std::ptrdiff_t>(starts[w]));
  }
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  signal::write_signal_csv(out, result);

  ordered_json j;
  j["input"] = in.filename().string();
  j["output"] = out.filename().string();
  j["samples"] = n;
  j["rate_hz"] = result.rate_hz;
  j["windows"] = starts.size();
  write_json(sibling(out, "_summary.json"), j);
  note("denoise: " + std::to_string(n) + " samples -> " + out.string());
  return 0;
}

}  // namespace

int cmd_denoise(const Globals& g, const DenoiseOptions& o) {
  const auto model = load_weights(g.path(o.weights));
  const fs::path in = g.path(o.input);
  if (!fs::exists(in)) throw ConfigError("input file not found: " + in.string());
  const bool csv = in.extension() == ".csv";
  fs::path out = o.output.empty() ? fs::path("out") / (in.stem().string() + "_denoised" + (csv ? ".csv" : ".jsonl"))
                                  : o.output;
  out = g.path(out);
  if (csv) return denoise_csv(g, model, in, out);

  std::vector<signal::Segment> segments;
  std::vector<std::vector<double>> clean;
  signal::for_each_jsonl(in, [&](const nlohmann::json& rec, std::size_t) {
    segments.push_back(signal::segment_from_json(rec));
    std::vector<double> target;
    if (rec.contains("clean_samples")) {
      target = rec.at("clean_samples").get<std::vector<double>>();
      if (target.size() != segments.back().samples.size()) {
        throw FormatError("clean_samples length differs from samples");
      }
    }
    clean.push_back(std::move(target));
  });
  std::vector<std::vector<double>> inputs;
  for (const auto& s : segments) inputs.push_back(s.samples);
  const auto outputs = models::denoise_all(model, inputs, g.jobs);

  std::vector<ordered_json> records;
  ordered_json per_segment = ordered_json::array();
  MetricsMean denoised_mean, input_mean;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    auto seg = segments[i];
    seg.samples = outputs[i];
    records.push_back(signal::segment_to_json(seg));
    if (clean[i].empty()) continue;
    const auto m = evaluate::recon_metrics(inputs[i], clean[i], outputs[i]);
    const auto base = evaluate::recon_metrics(inputs[i], clean[i], inputs[i]);
    denoised_mean.add(m);
    input_mean.add(base);
    ordered_json row;
    row["index"] = i;
    row["subject_id"] = segments[i].subject_id;
    row["start_time_s"] = segments[i].start_time_s;
    row["denoised"] = metrics_json(m);
    row["input"] = metrics_json(base);
    per_segment.push_back(std::move(row));
  }
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  signal::write_jsonl(out, records);

  ordered_json j;
  j["input"] = o.input.string();
  j["output"] = out.filename().string();
  j["weights"] = o.weights.filename().string();
  j["model"] = std::string(models::to_string(model.config().kind));
  j["segments"] = segments.size();
  if (denoised_mean.n > 0) {
    j["denoised"] = denoised_mean.json();
    j["input_baseline"] = input_mean.json();
    j["per_segment"] = std::move(per_segment);
  }
  write_json(sibling(out, "_metrics.json"), j);
  note("denoise: " + std::to_string(segments.size()) + " segments -> " + out.string());
  return 0;
}

int cmd_profile(const Globals& g, const ProfileOptions& o) {
  std::vector<models::ProfileReport> reports;
  if (o.weights.empty()) {
    reports.push_back(models::profile(models::build_teacher(g.config.teacher_model())));
    reports.push_back(models::profile(models::build_student(g.config.student_model())));
  } else {
    for (const auto& w : o.weights) {
      auto r = models::profile(load_weights(g.path(w)));
      r.model = w.stem().string();
      reports.push_back(std::move(r));
    }
  }
  ordered_json j;
  j["input_length"] = signal::kSegmentLength;
  ordered_json list = ordered_json::array();
  for (const auto& r : reports) list.push_back(models::profile_to_json(r));
  j["models"] = std::move(list);
  if (reports.size() == 2) {
    j["flops_ratio"] = static_cast<double>(reports[0].flops) / static_cast<double>(reports[1].flops);
  }
  const fs::path base = g.path(o.out);
  write_json(base.string() + ".json", j);

  std::string text = models::format_profile_table(reports);
  const std::string summary = text;
  for (const auto& r : reports) text += "\n" + r.model + "\n" + models::format_layer_table(r);
  signal::write_text(base.string() + ".txt", text);
  std::cout << summary;
  return 0;
}

int cmd_evaluate(const Globals& g, const EvaluateOptions& o) {
  const auto cohort = evaluate::read_cohort_jsonl(g.path(o.cohort));
  const double target = o.target_specificity.value_or(g.config.real("evaluate.target_specificity", 0.90));

  auto resolve = [&](const std::optional<fs::path>& given, const fs::path& fallback) -> std::optional<models::ModelGraph> {
    if (given) return load_weights(g.path(*given));
    if (fs::exists(g.path(fallback))) return models::load_model(g.path(fallback));
    return std::nullopt;
  };
  const auto student = resolve(o.student, "runs/student_kd/student_kd_best.edaw");
  const auto teacher = resolve(o.teacher, "runs/teacher/teacher_best.edaw");

  using Estimator = std::function<std::vector<double>(std::span<const double>)>;
  std::vector<std::pair<std::string, Estimator>> methods;
  methods.emplace_back("no-denoise", [](std::span<const double> x) { return std::vector<double>(x.begin(), x.end()); });
  methods.emplace_back("exp-filter", [](std::span<const double> x) { return evaluate::exp_filter(x); });
  if (student) methods.emplace_back("student", [&](std::span<const double> x) { return models::denoise(*student, x); });
  if (teacher) methods.emplace_back("teacher", [&](std::span<const double> x) { return models::denoise(*teacher, x); });

  std::vector<const evaluate::CohortSegment*> flat;
  for (const auto& r : cohort) {
    for (const auto& s : r.baseline) flat.push_back(&s);
    for (const auto& s : r.event) flat.push_back(&s);
  }

  ordered_json methods_json = ordered_json::array();
  std::string csv = "method,subject_id,auroc,sensitivity,specificity,accuracy,threshold,mean_lead_time_s\n";
  std::vector<ordered_json> audit;
  for (const auto& [name, estimate] : methods) {
    std::vector<std::vector<double>> est(flat.size());
    parallel_for(flat.size(), g.jobs, [&](std::size_t i) { est[i] = estimate(flat[i]->segment.samples); });

    auto processed = cohort;
    std::size_t k = 0;
    MetricsMean recon;
    for (auto& r : processed) {
      for (auto* part : {&r.baseline, &r.event}) {
        for (auto& s : *part) {
          if (!s.clean.empty()) recon.add(evaluate::recon_metrics(s.segment.samples, s.clean, est[k]));
          s.segment.samples = std::move(est[k++]);
        }
      }
    }
    const auto result = evaluate::loso_evaluate(evaluate::score_cohort(processed, nullptr, g.jobs), target, g.jobs);
    ordered_json m;
    m["method"] = name;
    m["reconstruction"] = recon.json();
    m["loso"] = evaluate::cohort_result_to_json(result);
    methods_json.push_back(std::move(m));
    csv += evaluate::cohort_result_csv(result, name);
    for (auto& row : evaluate::fold_audit_rows(result, name)) audit.push_back(std::move(row));
    note("evaluate: " + name + " macro AUROC " + signal::format_double(result.macro_auroc));
  }

  ordered_json j;
  j["cohort"] = o.cohort.string();
  j["recordings"] = cohort.size();
  j["segments"] = flat.size();
  j["target_specificity"] = target;
  j["methods"] = std::move(methods_json);
  const fs::path base = g.path(o.out);
  write_json(base.string() + ".json", j);
  signal::write_text(base.string() + ".csv", csv);
  signal::write_jsonl(base.string() + "_folds.jsonl", audit);
  return 0;
}

}  // namespace edakd::cli
