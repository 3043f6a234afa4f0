#include "edakd/distill/train_state.hpp"

#include <fstream>
#include <map>

#include "edakd/errors.hpp"
#include "edakd/models/archive.hpp"
#include "edakd/signal/io.hpp"

namespace edakd::distill {

namespace {

using models::ArchiveTensor;
using models::DType;

void append_set(std::vector<ArchiveTensor>& out, const char* prefix, const tensor::ParameterSet& set) {
  for (const auto& p : set) {
    const auto v = p.tensor.values();
    const std::string base = std::string(prefix) + ":" + p.name;
    out.push_back({base, p.tensor.shape(), DType::float64, {v.begin(), v.end()}});
    out.push_back({base + ":m1", p.tensor.shape(), DType::float64, p.first_moment});
    out.push_back({base + ":m2", p.tensor.shape(), DType::float64, p.second_moment});
  }
}

void restore_set(const std::map<std::string, const ArchiveTensor*>& by_name, const char* prefix,
                 tensor::ParameterSet& set, const std::filesystem::path& path) {
  for (auto& p : set) {
    const std::string base = std::string(prefix) + ":" + p.name;
    auto fetch = [&](const std::string& name) -> const ArchiveTensor& {
      const auto it = by_name.find(name);
      if (it == by_name.end()) throw FormatError(path.string() + ": state lacks " + name);
      if (it->second->shape != p.tensor.shape()) {
        throw FormatError(path.string() + ": shape mismatch for " + name);
      }
      return *it->second;
    };
    const auto& w = fetch(base);
    std::copy(w.values.begin(), w.values.end(), p.tensor.values().begin());
    p.first_moment = fetch(base + ":m1").values;
    p.second_moment = fetch(base + ":m2").values;
  }
}

nlohmann::ordered_json breakdown_json(const LossBreakdown& l) {
  return nlohmann::ordered_json::array({l.total, l.recon, l.kd, l.response, l.feature});
}

}  // namespace

void save_train_state(const std::filesystem::path& path, const TrainState& state,
                      const tensor::ParameterSet& model, const tensor::ParameterSet* projections) {
  std::vector<ArchiveTensor> tensors;
  append_set(tensors, "model", model);
  if (projections) append_set(tensors, "proj", *projections);
  models::write_archive(path, tensors);

  nlohmann::ordered_json j;
  j["step"] = state.step;
  j["best_epoch"] = state.best_epoch ? nlohmann::ordered_json(*state.best_epoch) : nlohmann::ordered_json(nullptr);
  j["best_val_mae"] = state.best_val_mae;
  j["max_composition_error"] = state.max_composition_error;
  auto epochs = nlohmann::ordered_json::array();
  for (const auto& e : state.epochs) {
    epochs.push_back({e.epoch, e.lr, e.train_total, e.train_recon, e.train_response,
                      e.train_feature, e.val_mae, e.val_snr_imp});
  }
  j["epochs"] = std::move(epochs);
  auto batches = nlohmann::ordered_json::array();
  for (const auto& b : state.batches) batches.push_back(breakdown_json(b));
  j["batches"] = std::move(batches);
  signal::write_text(path.string() + ".json", j.dump() + "\n");
}

std::optional<TrainState> load_train_state(const std::filesystem::path& path,
                                           tensor::ParameterSet& model,
                                           tensor::ParameterSet* projections) {
  const std::filesystem::path meta = path.string() + ".json";
  if (!std::filesystem::exists(path) || !std::filesystem::exists(meta)) return std::nullopt;
  const auto tensors = models::read_archive(path);
  std::map<std::string, const ArchiveTensor*> by_name;
  for (const auto& t : tensors) by_name[t.name] = &t;
  restore_set(by_name, "model", model, path);
  if (projections) restore_set(by_name, "proj", *projections, path);

  std::ifstream in(meta);
  TrainState s;
  try {
    const auto j = nlohmann::json::parse(in);
    s.step = j.at("step").get<std::size_t>();
    if (!j.at("best_epoch").is_null()) s.best_epoch = j.at("best_epoch").get<std::size_t>();
    s.best_val_mae = j.at("best_val_mae").get<double>();
    s.max_composition_error = j.at("max_composition_error").get<double>();
    for (const auto& e : j.at("epochs")) {
      EpochRecord r;
      r.epoch = e.at(0).get<std::size_t>();
      r.lr = e.at(1).get<double>();
      r.train_total = e.at(2).get<double>();
      r.train_recon = e.at(3).get<double>();
      r.train_response = e.at(4).get<double>();
      r.train_feature = e.at(5).get<double>();
      r.val_mae = e.at(6).get<double>();
      r.val_snr_imp = e.at(7).get<double>();
      s.epochs.push_back(r);
    }
    for (const auto& b : j.at("batches")) {
      s.batches.push_back({b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                           b.at(3).get<double>(), b.at(4).get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(meta.string() + ": " + e.what());
  }
  return s;
}

}  // namespace edakd::distill
