#include "rforge/nce.hpp"

#include <algorithm>
#include <cmath>

#include "rforge/error.hpp"

namespace rforge {

namespace {

void check_finite(double e_pos, std::span<const double> e_negs) {
  if (!std::isfinite(e_pos))
    throw NumericError("nce_loss: non-finite positive energy");
  for (double e : e_negs)
    if (!std::isfinite(e))
      throw NumericError("nce_loss: non-finite negative energy");
}

} // namespace

double nce_loss(double e_pos, std::span<const double> e_negs) {
  check_finite(e_pos, e_negs);
  double m = -e_pos;
  for (double e : e_negs)
    m = std::max(m, -e);
  double sum = std::exp(-e_pos - m);
  for (double e : e_negs)
    sum += std::exp(-e - m);
  return e_pos + m + std::log(sum);
}

double nce_loss_with_grad(double e_pos, std::span<const double> e_negs,
                          NceGradient& grad) {
  check_finite(e_pos, e_negs);
  double m = -e_pos;
  for (double e : e_negs)
    m = std::max(m, -e);
  const double s_pos = std::exp(-e_pos - m);
  double sum = s_pos;
  grad.d_negs.resize(e_negs.size());
  for (std::size_t i = 0; i < e_negs.size(); ++i) {
    grad.d_negs[i] = std::exp(-e_negs[i] - m);
    sum += grad.d_negs[i];
  }
  grad.d_pos = 1.0 - s_pos / sum;
  for (auto& d : grad.d_negs)
    d = -d / sum;
  return e_pos + m + std::log(sum);
}

} // namespace rforge
