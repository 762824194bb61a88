// Shared dense-network primitives (internal).
#pragma once

#include <cmath>

#include <Eigen/Core>

#include "rforge/rng.hpp"

namespace rforge::nn {

inline constexpr double kLayerNormEps = 1e-5;

inline double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2));
}

inline double gelu_grad(double x) {
  const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  return 0.5 * (1.0 + std::erf(x * M_SQRT1_2)) + x * phi;
}

inline Eigen::MatrixXd gelu(const Eigen::MatrixXd& x) {
  return x.unaryExpr([](double v) { return gelu(v); });
}

// y = x * w^T + 1 b^T, with w (out x in) and b (out x 1); x rows are items.
inline Eigen::MatrixXd linear(const Eigen::MatrixXd& x,
                              const Eigen::MatrixXd& w,
                              const Eigen::MatrixXd& b) {
  return (x * w.transpose()).rowwise() + b.col(0).transpose();
}

// Backward of linear: accumulates dw, db; returns dx.
inline Eigen::MatrixXd linear_backward(const Eigen::MatrixXd& x,
                                       const Eigen::MatrixXd& w,
                                       const Eigen::MatrixXd& dy,
                                       Eigen::MatrixXd& dw,
                                       Eigen::MatrixXd& db) {
  dw.noalias() += dy.transpose() * x;
  db.col(0).noalias() += dy.colwise().sum().transpose();
  return dy * w;
}

struct LayerNormCache {
  Eigen::MatrixXd xhat;    // normalized rows
  Eigen::VectorXd inv_std; // per row
};

// Row-wise layer norm with scale g and shift b (both n x 1).
inline Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x,
                                  const Eigen::MatrixXd& g,
                                  const Eigen::MatrixXd& b,
                                  LayerNormCache& cache) {
  const Eigen::Index rows = x.rows(), cols = x.cols();
  cache.xhat.resize(rows, cols);
  cache.inv_std.resize(rows);
  Eigen::MatrixXd y(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().mean();
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.inv_std[i] = inv;
    cache.xhat.row(i) = (x.row(i).array() - mean) * inv;
    y.row(i) = cache.xhat.row(i).array() * g.col(0).transpose().array() +
               b.col(0).transpose().array();
  }
  return y;
}

inline Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& dy,
                                           const Eigen::MatrixXd& g,
                                           const LayerNormCache& cache,
                                           Eigen::MatrixXd& dg,
                                           Eigen::MatrixXd& db) {
  const Eigen::Index rows = dy.rows(), cols = dy.cols();
  Eigen::MatrixXd dx(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto xhat = cache.xhat.row(i).array();
    const auto dyr = dy.row(i).array();
    dg.col(0).array() += (dyr * xhat).transpose();
    db.col(0).array() += dyr.transpose();
    const Eigen::ArrayXXd dxhat = dyr * g.col(0).transpose().array();
    const double m1 = dxhat.mean();
    const double m2 = (dxhat * xhat).mean();
    dx.row(i) = cache.inv_std[i] * (dxhat - m1 - xhat * m2);
  }
  return dx;
}

// Row-wise softmax.
inline Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    Eigen::ArrayXd e = (x.row(i).array() - m).exp();
    y.row(i) = e / e.sum();
  }
  return y;
}

inline Eigen::MatrixXd softmax_rows_backward(const Eigen::MatrixXd& p,
                                             const Eigen::MatrixXd& dp) {
  Eigen::MatrixXd dx(p.rows(), p.cols());
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double dot = p.row(i).dot(dp.row(i));
    dx.row(i) = p.row(i).array() * (dp.row(i).array() - dot);
  }
  return dx;
}

// Xavier-uniform init for w (out x in); biases start at zero.
inline Eigen::MatrixXd xavier(Eigen::Index out, Eigen::Index in, Rng& rng) {
  const double limit = std::sqrt(6.0 / double(in + out));
  Eigen::MatrixXd w(out, in);
  for (Eigen::Index j = 0; j < in; ++j)
    for (Eigen::Index i = 0; i < out; ++i)
      w(i, j) = (2.0 * rng.uniform() - 1.0) * limit;
  return w;
}

// Truncated normal (sigma 0.02, clipped at 2 sigma) for embedding tables.
inline Eigen::MatrixXd trunc_normal(Eigen::Index rows, Eigen::Index cols,
                                    Rng& rng, double sigma = 0.02) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      double z;
      do {
        z = rng.normal();
      } while (std::abs(z) > 2.0);
      m(i, j) = z * sigma;
    }
  return m;
}

inline Eigen::MatrixXd zeros(Eigen::Index rows, Eigen::Index cols) {
  return Eigen::MatrixXd::Zero(rows, cols);
}

} // namespace rforge::nn
