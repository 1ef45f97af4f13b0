#include "handsmooth/autodiff.hpp"

namespace handsmooth::ad {

thread_local Tape* Tape::active_ = nullptr;

Eigen::VectorXd Tape::backprop(Index output, Eigen::Index num_leaves) const {
  std::vector<double> adjoint(static_cast<std::size_t>(output) + 1, 0.0);
  adjoint[output] = 1.0;
  for (Index i = output; i >= 0; --i) {
    const double a = adjoint[i];
    if (a == 0.0) continue;
    const Node& n = nodes_[i];
    if (n.lhs != kNone) adjoint[n.lhs] += n.d_lhs * a;
    if (n.rhs != kNone) adjoint[n.rhs] += n.d_rhs * a;
  }
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(num_leaves);
  for (Eigen::Index i = 0; i < num_leaves && i <= output; ++i) grad[i] = adjoint[i];
  return grad;
}

}  // namespace handsmooth::ad
