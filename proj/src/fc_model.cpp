#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nn_ops.hpp"
#include "rforge/error.hpp"
#include "rforge/model.hpp"

namespace rforge {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct FcModel::Cache {
  MatrixXd embedded; // k x width
  MatrixXd down;     // k x down_proj
  VectorXd flat;     // k * down_proj
  VectorXd pre1, act1, pre2, act2, pre3, act3; // dense stack
  MatrixXd res_pre, res_act; // groups x width
  VectorXd pooled;           // width
  double out = 0;
};

FcModel::FcModel(const ModelConfig& config, std::uint64_t seed)
    : config_(config) {
  config_.validate();
  down_proj_ = config_.width / 2;
  dense_width_ = 4 * config_.width;
  if (down_proj_ < 1 || dense_width_ % config_.width != 0)
    throw ConfigError("fc model requires width >= 2");
  Rng rng(seed ^ 0x5ca1ab1eULL);
  embed_element_ = nn::trunc_normal(kNumElements, config_.cat_embed, rng);
  embed_label_ = nn::trunc_normal(kNumAtomLabels, config_.cat_embed, rng);
  embed_aa_ = nn::trunc_normal(kNumAminoAcids, config_.cat_embed, rng);
  coord_w_ = nn::xavier(config_.coord_proj, 3, rng);
  coord_b_ = nn::zeros(config_.coord_proj, 1);
  down_w_ = nn::xavier(down_proj_, config_.width, rng);
  down_b_ = nn::zeros(down_proj_, 1);
  const int flat = config_.k * down_proj_;
  d1_w_ = nn::xavier(dense_width_, flat, rng);
  d1_b_ = nn::zeros(dense_width_, 1);
  d2_w_ = nn::xavier(dense_width_, dense_width_, rng);
  d2_b_ = nn::zeros(dense_width_, 1);
  d3_w_ = nn::xavier(dense_width_, dense_width_, rng);
  d3_b_ = nn::zeros(dense_width_, 1);
  res_w1_ = nn::xavier(config_.width, config_.width, rng);
  res_b1_ = nn::zeros(config_.width, 1);
  res_w2_ = nn::xavier(config_.width, config_.width, rng);
  res_b2_ = nn::zeros(config_.width, 1);
  out_w_ = nn::xavier(1, config_.width, rng);
  out_b_ = nn::zeros(1, 1);
}

std::vector<NamedTensor> FcModel::tensors() {
  return {
      {"embed.element", &embed_element_},
      {"embed.label", &embed_label_},
      {"embed.aa", &embed_aa_},
      {"coord.w", &coord_w_},
      {"coord.b", &coord_b_},
      {"down.w", &down_w_},
      {"down.b", &down_b_},
      {"dense1.w", &d1_w_},
      {"dense1.b", &d1_b_},
      {"dense2.w", &d2_w_},
      {"dense2.b", &d2_b_},
      {"dense3.w", &d3_w_},
      {"dense3.b", &d3_b_},
      {"res.w1", &res_w1_},
      {"res.b1", &res_b1_},
      {"res.w2", &res_w2_},
      {"res.b2", &res_b2_},
      {"out.w", &out_w_},
      {"out.b", &out_b_},
  };
}

MatrixXd FcModel::embed(const FeaturizedContext& fc) const {
  const int k = fc.size();
  const int c = config_.cat_embed;
  MatrixXd e(k, config_.width);
  for (int i = 0; i < k; ++i) {
    e.block(i, 0, 1, c) = embed_element_.row(fc.element_idx[i]);
    e.block(i, c, 1, c) = embed_label_.row(fc.label_idx[i]);
    e.block(i, 2 * c, 1, c) = embed_aa_.row(fc.aa_idx[i]);
  }
  e.block(0, 3 * c, k, config_.coord_proj) =
      nn::linear(fc.coords, coord_w_, coord_b_);
  return e;
}

void FcModel::forward(const FeaturizedContext& fc, Cache& cache) const {
  if (fc.size() != config_.k)
    throw Error("context has " + std::to_string(fc.size()) +
                " atoms, model expects " + std::to_string(config_.k));
  const int k = config_.k;
  const int groups = dense_width_ / config_.width;

  cache.embedded = embed(fc);
  cache.down = nn::linear(cache.embedded, down_w_, down_b_);
  cache.flat.resize(k * down_proj_);
  for (int i = 0; i < k; ++i)
    cache.flat.segment(i * down_proj_, down_proj_) =
        cache.down.row(i).transpose();

  auto dense = [](const MatrixXd& w, const MatrixXd& b, const VectorXd& x) {
    return (w * x + b.col(0)).eval();
  };
  cache.pre1 = dense(d1_w_, d1_b_, cache.flat);
  cache.act1 = cache.pre1.unaryExpr([](double v) { return nn::gelu(v); });
  cache.pre2 = dense(d2_w_, d2_b_, cache.act1);
  cache.act2 = cache.pre2.unaryExpr([](double v) { return nn::gelu(v); });
  cache.pre3 = dense(d3_w_, d3_b_, cache.act2);
  cache.act3 = cache.pre3.unaryExpr([](double v) { return nn::gelu(v); });

  cache.res_pre.resize(groups, config_.width);
  cache.res_act.resize(groups, config_.width);
  cache.pooled = VectorXd::Zero(config_.width);
  for (int g = 0; g < groups; ++g) {
    const VectorXd h = cache.act3.segment(g * config_.width, config_.width);
    cache.res_pre.row(g) = (res_w1_ * h + res_b1_.col(0)).transpose();
    cache.res_act.row(g) = cache.res_pre.row(g).unaryExpr(
        [](double v) { return nn::gelu(v); });
    cache.pooled +=
        res_w2_ * cache.res_act.row(g).transpose() + res_b2_.col(0) + h;
  }
  cache.pooled /= double(groups);
  cache.out = out_w_.row(0).dot(cache.pooled) + out_b_(0, 0);
  if (!std::isfinite(cache.out))
    throw NumericError("non-finite energy");
}

double FcModel::energy(const FeaturizedContext& fc) const {
  Cache cache;
  forward(fc, cache);
  return cache.out;
}

std::vector<double>
FcModel::energy_batch(std::span<const FeaturizedContext> fcs) const {
  std::vector<double> out(fcs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(fcs.size()); ++i) {
    Cache cache;
    forward(fcs[i], cache);
    out[i] = cache.out;
  }
  return out;
}

void FcModel::backward(const FeaturizedContext& fc, const Cache& cache,
                       double de, GradBuffer& grads,
                       MatrixXd* dcoords) const {
  const int k = config_.k;
  const int c = config_.cat_embed;
  const int groups = dense_width_ / config_.width;

  int g = 0;
  MatrixXd& g_embed_el = grads[g++];
  MatrixXd& g_embed_label = grads[g++];
  MatrixXd& g_embed_aa = grads[g++];
  MatrixXd& g_coord_w = grads[g++];
  MatrixXd& g_coord_b = grads[g++];
  MatrixXd& g_down_w = grads[g++];
  MatrixXd& g_down_b = grads[g++];
  MatrixXd& g_d1_w = grads[g++];
  MatrixXd& g_d1_b = grads[g++];
  MatrixXd& g_d2_w = grads[g++];
  MatrixXd& g_d2_b = grads[g++];
  MatrixXd& g_d3_w = grads[g++];
  MatrixXd& g_d3_b = grads[g++];
  MatrixXd& g_res_w1 = grads[g++];
  MatrixXd& g_res_b1 = grads[g++];
  MatrixXd& g_res_w2 = grads[g++];
  MatrixXd& g_res_b2 = grads[g++];
  MatrixXd& g_out_w = grads[g++];
  MatrixXd& g_out_b = grads[g++];

  g_out_w.row(0) += de * cache.pooled.transpose();
  g_out_b(0, 0) += de;
  const VectorXd d_pooled = (de / double(groups)) * out_w_.row(0).transpose();

  VectorXd d_act3 = VectorXd::Zero(dense_width_);
  for (int grp = 0; grp < groups; ++grp) {
    const VectorXd h = cache.act3.segment(grp * config_.width, config_.width);
    const VectorXd r_act = cache.res_act.row(grp).transpose();
    const VectorXd r_pre = cache.res_pre.row(grp).transpose();
    g_res_w2.noalias() += d_pooled * r_act.transpose();
    g_res_b2.col(0) += d_pooled;
    VectorXd d_r_act = res_w2_.transpose() * d_pooled;
    VectorXd d_r_pre(d_r_act.size());
    for (Eigen::Index i = 0; i < d_r_pre.size(); ++i)
      d_r_pre[i] = d_r_act[i] * nn::gelu_grad(r_pre[i]);
    g_res_w1.noalias() += d_r_pre * h.transpose();
    g_res_b1.col(0) += d_r_pre;
    d_act3.segment(grp * config_.width, config_.width) =
        res_w1_.transpose() * d_r_pre + d_pooled;
  }

  auto dense_backward = [](const MatrixXd& w, const VectorXd& x,
                           const VectorXd& pre, const VectorXd& d_act,
                           MatrixXd& gw, MatrixXd& gb) {
    VectorXd d_pre(d_act.size());
    for (Eigen::Index i = 0; i < d_pre.size(); ++i)
      d_pre[i] = d_act[i] * nn::gelu_grad(pre[i]);
    gw.noalias() += d_pre * x.transpose();
    gb.col(0) += d_pre;
    return (w.transpose() * d_pre).eval();
  };
  const VectorXd d_act2 =
      dense_backward(d3_w_, cache.act2, cache.pre3, d_act3, g_d3_w, g_d3_b);
  const VectorXd d_act1 =
      dense_backward(d2_w_, cache.act1, cache.pre2, d_act2, g_d2_w, g_d2_b);
  const VectorXd d_flat =
      dense_backward(d1_w_, cache.flat, cache.pre1, d_act1, g_d1_w, g_d1_b);

  MatrixXd d_down(k, down_proj_);
  for (int i = 0; i < k; ++i)
    d_down.row(i) = d_flat.segment(i * down_proj_, down_proj_).transpose();
  MatrixXd d_embed =
      nn::linear_backward(cache.embedded, down_w_, d_down, g_down_w, g_down_b);

  for (int i = 0; i < k; ++i) {
    g_embed_el.row(fc.element_idx[i]) += d_embed.block(i, 0, 1, c);
    g_embed_label.row(fc.label_idx[i]) += d_embed.block(i, c, 1, c);
    g_embed_aa.row(fc.aa_idx[i]) += d_embed.block(i, 2 * c, 1, c);
  }
  const MatrixXd d_proj = d_embed.rightCols(config_.coord_proj);
  g_coord_w.noalias() += d_proj.transpose() * fc.coords;
  g_coord_b.col(0) += d_proj.colwise().sum().transpose();
  if (dcoords)
    *dcoords = d_proj * coord_w_;
}

void FcModel::backward_batch(std::span<const FeaturizedContext> fcs,
                             std::span<const double> dL_dE,
                             GradBuffer& grads) const {
  if (fcs.size() != dL_dE.size())
    throw std::invalid_argument("backward_batch: size mismatch");
#ifdef _OPENMP
  const int nthreads = omp_get_max_threads();
#else
  const int nthreads = 1;
#endif
  std::vector<GradBuffer> locals(nthreads);
#pragma omp parallel
  {
#ifdef _OPENMP
    GradBuffer& local = locals[omp_get_thread_num()];
#else
    GradBuffer& local = locals[0];
#endif
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(fcs.size()); ++i) {
      if (local.empty())
        local = make_grad_buffer();
      Cache cache;
      forward(fcs[i], cache);
      backward(fcs[i], cache, dL_dE[i], local, nullptr);
    }
  }
  for (auto& local : locals) {
    if (local.empty())
      continue;
    for (std::size_t t = 0; t < grads.size(); ++t)
      grads[t] += local[t];
  }
}

double FcModel::energy_input_grad(const FeaturizedContext& fc,
                                  MatrixXd& dcoords) const {
  Cache cache;
  forward(fc, cache);
  GradBuffer grads = make_grad_buffer();
  backward(fc, cache, 1.0, grads, &dcoords);
  return cache.out;
}

VectorXd FcModel::pooled_embedding(const FeaturizedContext& fc) const {
  Cache cache;
  forward(fc, cache);
  return cache.pooled;
}

} // namespace rforge
