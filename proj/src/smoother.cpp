#include "handsmooth/smoother.hpp"

#include <cmath>
#include <numbers>

#include "handsmooth/autodiff.hpp"

namespace handsmooth {

void SmootherConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("smoother: learning_rate must be positive");
  }
  if (max_iters < 1) throw InvalidArgument("smoother: max_iters must be at least 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw InvalidArgument("smoother: Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw InvalidArgument("smoother: adam_eps must be positive");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw InvalidArgument("smoother: weight_decay must be non-negative");
  }
  if (!(lr_min >= 0.0) || lr_min > learning_rate) {
    throw InvalidArgument("smoother: lr_min must lie in [0, learning_rate]");
  }
  weights.validate();
}

double cosine_lr(int step, const SmootherConfig& config) {
  if (step < 0 || step > config.max_iters) {
    throw InvalidArgument("cosine_lr: step " + std::to_string(step) + " outside [0, max_iters]");
  }
  const double progress = static_cast<double>(step) / static_cast<double>(config.max_iters);
  return config.lr_min +
         0.5 * (config.learning_rate - config.lr_min) * (1.0 + std::cos(std::numbers::pi * progress));
}

void adamw_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad,
                AdamWState& state, double lr, const SmootherConfig& config) {
  if (params.size() != grad.size() || state.m.size() != grad.size() || state.v.size() != grad.size()) {
    throw InvalidArgument("adamw_step: length mismatch");
  }
  if (!grad.allFinite()) throw Diverged("adamw_step: non-finite gradient", {});

  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  state.step += 1;
  state.m = b1 * state.m + (1.0 - b1) * grad;
  state.v = b2 * state.v + (1.0 - b2) * grad.cwiseAbs2();
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

  const Eigen::ArrayXd m_hat = state.m.array() / bias1;
  const Eigen::ArrayXd v_hat = state.v.array() / bias2;
  params.array() -= lr * (m_hat / (v_hat.sqrt() + config.adam_eps) + config.weight_decay * params.array());
}

SmoothResult smooth(const TrajectoryParams& initial, const SequenceObservation& obs, const HandSkeleton& skeleton,
                    const SmootherConfig& config, const std::optional<TrajectoryParams>& ground_truth) {
  config.validate();
  initial.validate();
  obs.validate();
  if (initial.num_frames() != obs.num_frames) {
    throw InvalidArgument("smooth: trajectory and observation frame counts differ");
  }

  const Objective objective(skeleton, obs, config.weights, config.norm);
  Eigen::VectorXd flat = initial.flatten();
  const Eigen::Index free_begin = config.optimize_shape ? 0 : kNumShape;
  const Eigen::Index free_size = flat.size() - free_begin;
  AdamWState state = AdamWState::zeros(free_size);

  SmoothResult result;
  LossReport& report = result.report;
  report.entries.reserve(static_cast<std::size_t>(config.max_iters) + 1);
  if (ground_truth) report.initial_metrics = evaluate(initial, ground_truth, obs, skeleton);

  LossTerms<double> last;
  auto recorded = [&](const ad::VectorX<ad::Var>& x) {
    const LossTerms<ad::Var> t = objective.terms<ad::Var>(x);
    last = {t.acce_pose.value(), t.acce_orients.value(), t.acce_position.value(), t.reprojection.value(),
            t.total.value()};
    return t.total;
  };

  for (int k = 0;; ++k) {
    const ad::Gradient g = ad::record_and_backprop(recorded, flat);
    const double lr = cosine_lr(k, config);
    report.entries.push_back(
        {k, lr, last.total, last.acce_pose, last.acce_orients, last.acce_position, last.reprojection});

    if (!std::isfinite(g.loss) || !g.grad.allFinite()) {
      report.diverged = true;
      throw Diverged("smooth: non-finite loss or gradient at iteration " + std::to_string(k), report);
    }
    if (k == config.max_iters) break;
    adamw_step(flat.tail(free_size), g.grad.tail(free_size), state, lr, config);
  }

  result.refined = TrajectoryParams::unflatten(flat);
  result.refined.shape = config.optimize_shape ? result.refined.shape : initial.shape;
  report.non_improving = report.entries.back().total > report.entries.front().total;
  if (ground_truth) report.final_metrics = evaluate(result.refined, ground_truth, obs, skeleton);
  return result;
}

}  // namespace handsmooth
