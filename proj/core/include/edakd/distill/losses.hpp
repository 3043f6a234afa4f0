#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "edakd/models/model.hpp"
#include "edakd/tensor/graph.hpp"

namespace edakd::distill {

using models::kEncoderBlocks;
using tensor::Graph;
using tensor::ParameterSet;
using tensor::Tensor;
using tensor::Var;

/// total = recon_weight * recon + kd_weight * (response + feature_weight * feature)
struct LossWeights {
  double recon_weight = 0.5;
  double kd_weight = 0.5;
  double feature_weight = 0.3;
};

struct LossBreakdown {
  double total = 0.0;
  double recon = 0.0;
  double kd = 0.0;
  double response = 0.0;
  double feature = 0.0;
};

/// |total - composed(weights)|; zero up to rounding for any breakdown
/// produced by loss_student.
double composition_error(const LossBreakdown& loss, const LossWeights& weights);

/// Mean squared error over all samples.
double loss_teacher(std::span<const double> pred, std::span<const double> target);
Var loss_teacher(Var pred, Var target);

/// 1x1 convolutions mapping student tap i (C_i/2 channels) to teacher tap i (C_i).
class ProjectionSet {
 public:
  ProjectionSet() = default;
  /// He-normal weights, zero bias.
  ProjectionSet(const models::ModelConfig& student, const models::ModelConfig& teacher,
                std::uint64_t seed);

  ParameterSet& params() noexcept { return params_; }
  const ParameterSet& params() const noexcept { return params_; }
  bool empty() const noexcept { return params_.size() == 0; }

  Var project(Graph& graph, std::size_t block, Var student_tap) const;

 private:
  ParameterSet params_;
};

struct StudentLoss {
  Var total;  // differentiable total objective
  LossBreakdown values;
};

/// Reconstruction plus response and feature distillation. Teacher outputs
/// enter as constants, so gradients reach only the student and projections.
/// With `projections == nullptr` or kd_weight == 0 the KD terms are skipped and
/// logged as zero. Throws ShapeError when a projected tap mismatches.
StudentLoss loss_student(Graph& graph, Var y_norm, Var yhat_student, const Tensor* yhat_teacher,
                         std::span<const Var> student_taps, std::span<const Tensor> teacher_taps,
                         const ProjectionSet* projections, const LossWeights& weights);

}  // namespace edakd::distill
