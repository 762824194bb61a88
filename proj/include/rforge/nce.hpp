#pragma once

#include <span>
#include <vector>

namespace rforge {

// Contrastive loss: E+ + logsumexp(-E+, -E-_1, ..., -E-_N). The positive
// energy is included inside the logsumexp, so the loss is nonnegative and 0
// with no negatives. Stabilized against overflow; throws NumericError on
// non-finite input.
double nce_loss(double e_pos, std::span<const double> e_negs);

struct NceGradient {
  double d_pos;
  std::vector<double> d_negs;
};

double nce_loss_with_grad(double e_pos, std::span<const double> e_negs,
                          NceGradient& grad);

} // namespace rforge
