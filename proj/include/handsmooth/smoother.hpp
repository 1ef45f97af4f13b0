#pragma once

// Sequence refinement: the per-frame predictions are the trainable
// parameters, optimized against `Objective` with AdamW and a cosine
// learning-rate schedule. The 2D landmarks stay fixed targets.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "handsmooth/metrics.hpp"
#include "handsmooth/objective.hpp"

namespace handsmooth {

struct SmootherConfig {
  double learning_rate = 1e-2;
  int max_iters = 500;
  LossWeights weights;
  double weight_decay = 0.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double lr_min = 0.0;
  bool optimize_shape = false;
  ReprojectionNorm norm = ReprojectionNorm::l2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AdamWState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t step = 0;

  static AdamWState zeros(Eigen::Index size) {
    return {Eigen::VectorXd::Zero(size), Eigen::VectorXd::Zero(size), 0};
  }
};

struct LossEntry {
  int iteration = 0;
  double lr = 0.0;
  double total = 0.0;
  double acce_pose = 0.0;
  double acce_orients = 0.0;
  double acce_position = 0.0;
  double loss_2d = 0.0;

  bool operator==(const LossEntry&) const = default;
};

struct LossReport {
  std::vector<LossEntry> entries;
  bool non_improving = false;  // final total > initial total
  bool diverged = false;
  std::optional<MetricReport> initial_metrics;
  std::optional<MetricReport> final_metrics;

  bool operator==(const LossReport&) const = default;
};

// Non-finite loss or gradient. Carries the report up to the failure.
class Diverged : public Error {
 public:
  Diverged(const std::string& what, LossReport report) : Error(what), report_(std::move(report)) {}
  const LossReport& report() const { return report_; }

 private:
  LossReport report_;
};

// lr_min + (lr - lr_min) * (1 + cos(pi * step / max_iters)) / 2 for
// 0 <= step <= max_iters.
double cosine_lr(int step, const SmootherConfig& config);

// One decoupled-weight-decay Adam update in place:
//   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g^2
//   p -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p)
void adamw_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad,
                AdamWState& state, double lr, const SmootherConfig& config);

struct SmoothResult {
  TrajectoryParams refined;
  LossReport report;
};

// Runs `max_iters` AdamW steps from `initial`. The report holds
// max_iters + 1 entries (before every step and after the last). The shape
// segment is left untouched unless `optimize_shape`. When `ground_truth` is
// given the report also carries initial / final metrics.
SmoothResult smooth(const TrajectoryParams& initial, const SequenceObservation& obs,
                    const HandSkeleton& skeleton, const SmootherConfig& config = {},
                    const std::optional<TrajectoryParams>& ground_truth = std::nullopt);

}  // namespace handsmooth
