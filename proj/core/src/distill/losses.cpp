#include "edakd/distill/losses.hpp"

#include <cmath>

#include "edakd/errors.hpp"
#include "edakd/rng.hpp"
#include "edakd/tensor/ops.hpp"

namespace edakd::distill {

double composition_error(const LossBreakdown& l, const LossWeights& w) {
  return std::abs(l.total - (w.recon_weight * l.recon +
                             w.kd_weight * (l.response + w.feature_weight * l.feature)));
}

double loss_teacher(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) throw ShapeError("loss_teacher: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

Var loss_teacher(Var pred, Var target) { return ops::mse(pred, target); }

ProjectionSet::ProjectionSet(const models::ModelConfig& student, const models::ModelConfig& teacher,
                             std::uint64_t seed) {
  for (std::size_t i = 0; i < kEncoderBlocks; ++i) {
    const std::size_t cs = student.encoder_channels[i];
    const std::size_t ct = teacher.encoder_channels[i];
    const std::string n = "proj" + std::to_string(i + 1);
    params_.add(n + ".weight", models::he_normal({ct, cs, 1}, cs, derive_seed(seed, {i})));
    params_.add(n + ".bias", Tensor({ct}, 0.0));
  }
}

Var ProjectionSet::project(Graph& g, std::size_t block, Var z) const {
  const std::string n = "proj" + std::to_string(block + 1);
  const auto w = params_.find(n + ".weight");
  const auto b = params_.find(n + ".bias");
  if (!w || !b) throw ConfigError("projection " + n + " is missing");
  return ops::conv1d(z, g.parameter(params_, *w), g.parameter(params_, *b));
}

StudentLoss loss_student(Graph& g, Var y_norm, Var yhat_s, const Tensor* yhat_t,
                         std::span<const Var> taps_s, std::span<const Tensor> taps_t,
                         const ProjectionSet* projections, const LossWeights& w) {
  StudentLoss out;
  const Var recon = ops::mse(y_norm, yhat_s);
  out.values.recon = recon.value()[0];
  Var total = ops::scale(recon, w.recon_weight);

  const bool kd = projections != nullptr && yhat_t != nullptr && w.kd_weight != 0.0;
  if (kd) {
    if (taps_s.size() != kEncoderBlocks || taps_t.size() != kEncoderBlocks) {
      throw ShapeError("distillation needs five taps from each model");
    }
    if (yhat_t->shape() != yhat_s.shape()) throw ShapeError("teacher/student output shapes differ");
    const Var response = ops::mse(g.constant(*yhat_t), yhat_s);
    Var feature;
    for (std::size_t i = 0; i < kEncoderBlocks; ++i) {
      const Var projected = projections->project(g, i, taps_s[i]);
      if (projected.shape() != taps_t[i].shape()) {
        throw ShapeError("projected student tap " + std::to_string(i + 1) + " has shape " +
                         tensor::to_string(projected.shape()) + ", teacher tap has " +
                         tensor::to_string(taps_t[i].shape()));
      }
      const Var term = ops::mse(g.constant(taps_t[i]), projected);
      feature = feature.valid() ? ops::add(feature, term) : term;
    }
    out.values.response = response.value()[0];
    out.values.feature = feature.value()[0];
    const Var kd_loss = ops::add(response, ops::scale(feature, w.feature_weight));
    out.values.kd = kd_loss.value()[0];
    total = ops::add(total, ops::scale(kd_loss, w.kd_weight));
  }
  out.total = total;
  out.values.total = total.value()[0];
  return out;
}

}  // namespace edakd::distill
