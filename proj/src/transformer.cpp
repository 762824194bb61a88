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

namespace {

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

int thread_id() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

} // namespace

struct AtomTransformer::Cache {
  MatrixXd embedded; // k x width, inputs to the first block
  struct LayerCache {
    nn::LayerNormCache ln1, ln2;
    MatrixXd h_in;      // block input
    MatrixXd a;         // post-LN1
    MatrixXd q, k, v;   // k x width
    std::vector<MatrixXd> probs; // per head, k x k
    MatrixXd concat;    // k x width, pre-Wo
    MatrixXd h_mid;     // after attention residual
    MatrixXd b;         // post-LN2
    MatrixXd ff_pre;    // k x ff_width, pre-activation
    MatrixXd ff_act;    // k x ff_width
  };
  std::vector<LayerCache> layers;
  nn::LayerNormCache lnf;
  MatrixXd h_final;  // post final LN, k x width
  std::vector<Eigen::Index> argmax; // per column
  VectorXd pooled;   // width
  VectorXd mlp_pre;  // mlp_hidden
  VectorXd mlp_act;  // mlp_hidden
  double out = 0;
};

AtomTransformer::AtomTransformer(const ModelConfig& config, std::uint64_t seed)
    : config_(config) {
  config_.validate();
  Rng rng(seed);
  const int w = config_.width;
  embed_element_ = nn::trunc_normal(kNumElements, config_.cat_embed, rng);
  embed_label_ = nn::trunc_normal(kNumAtomLabels, config_.cat_embed, rng);
  embed_aa_ = nn::trunc_normal(kNumAminoAcids, config_.cat_embed, rng);
  coord_w_ = nn::xavier(config_.coord_proj, 3, rng);
  coord_b_ = nn::zeros(config_.coord_proj, 1);
  layers_.resize(config_.layers);
  for (auto& l : layers_) {
    l.ln1_g = MatrixXd::Ones(w, 1);
    l.ln1_b = nn::zeros(w, 1);
    l.ln2_g = MatrixXd::Ones(w, 1);
    l.ln2_b = nn::zeros(w, 1);
    l.wq = nn::xavier(w, w, rng);
    l.bq = nn::zeros(w, 1);
    l.wk = nn::xavier(w, w, rng);
    l.bk = nn::zeros(w, 1);
    l.wv = nn::xavier(w, w, rng);
    l.bv = nn::zeros(w, 1);
    l.wo = nn::xavier(w, w, rng);
    l.bo = nn::zeros(w, 1);
    l.ff_w1 = nn::xavier(config_.ff_width, w, rng);
    l.ff_b1 = nn::zeros(config_.ff_width, 1);
    l.ff_w2 = nn::xavier(w, config_.ff_width, rng);
    l.ff_b2 = nn::zeros(w, 1);
  }
  lnf_g_ = MatrixXd::Ones(w, 1);
  lnf_b_ = nn::zeros(w, 1);
  mlp_w1_ = nn::xavier(config_.mlp_hidden, w, rng);
  mlp_b1_ = nn::zeros(config_.mlp_hidden, 1);
  mlp_w2_ = nn::xavier(1, config_.mlp_hidden, rng);
  mlp_b2_ = nn::zeros(1, 1);
}

std::vector<NamedTensor> AtomTransformer::tensors() {
  std::vector<NamedTensor> out = {
      {"embed.element", &embed_element_}, {"embed.label", &embed_label_},
      {"embed.aa", &embed_aa_},           {"coord.w", &coord_w_},
      {"coord.b", &coord_b_},
  };
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    auto& l = layers_[i];
    const std::string p = "layer" + std::to_string(i) + ".";
    out.push_back({p + "ln1.g", &l.ln1_g});
    out.push_back({p + "ln1.b", &l.ln1_b});
    out.push_back({p + "attn.wq", &l.wq});
    out.push_back({p + "attn.bq", &l.bq});
    out.push_back({p + "attn.wk", &l.wk});
    out.push_back({p + "attn.bk", &l.bk});
    out.push_back({p + "attn.wv", &l.wv});
    out.push_back({p + "attn.bv", &l.bv});
    out.push_back({p + "attn.wo", &l.wo});
    out.push_back({p + "attn.bo", &l.bo});
    out.push_back({p + "ln2.g", &l.ln2_g});
    out.push_back({p + "ln2.b", &l.ln2_b});
    out.push_back({p + "ff.w1", &l.ff_w1});
    out.push_back({p + "ff.b1", &l.ff_b1});
    out.push_back({p + "ff.w2", &l.ff_w2});
    out.push_back({p + "ff.b2", &l.ff_b2});
  }
  out.push_back({"final.ln.g", &lnf_g_});
  out.push_back({"final.ln.b", &lnf_b_});
  out.push_back({"mlp.w1", &mlp_w1_});
  out.push_back({"mlp.b1", &mlp_b1_});
  out.push_back({"mlp.w2", &mlp_w2_});
  out.push_back({"mlp.b2", &mlp_b2_});
  return out;
}

MatrixXd AtomTransformer::embed(const FeaturizedContext& fc) const {
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

void AtomTransformer::forward(const FeaturizedContext& fc, Cache& cache) const {
  if (fc.size() != config_.k)
    throw Error("context has " + std::to_string(fc.size()) +
                " atoms, model expects " + std::to_string(config_.k));
  const int k = config_.k;
  const int heads = config_.heads;
  const int dh = config_.width / heads;
  const double scale = 1.0 / std::sqrt(double(dh));

  cache.embedded = embed(fc);
  cache.layers.resize(layers_.size());
  MatrixXd h = cache.embedded;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const Layer& l = layers_[li];
    auto& c = cache.layers[li];
    c.h_in = h;
    c.a = nn::layer_norm(h, l.ln1_g, l.ln1_b, c.ln1);
    c.q = nn::linear(c.a, l.wq, l.bq);
    c.k = nn::linear(c.a, l.wk, l.bk);
    c.v = nn::linear(c.a, l.wv, l.bv);
    c.probs.resize(heads);
    c.concat.resize(k, config_.width);
    for (int hd = 0; hd < heads; ++hd) {
      const auto qh = c.q.middleCols(hd * dh, dh);
      const auto kh = c.k.middleCols(hd * dh, dh);
      const auto vh = c.v.middleCols(hd * dh, dh);
      MatrixXd scores = qh * kh.transpose() * scale;
      c.probs[hd] = nn::softmax_rows(scores);
      c.concat.middleCols(hd * dh, dh).noalias() = c.probs[hd] * vh;
    }
    c.h_mid = h + nn::linear(c.concat, l.wo, l.bo);
    c.b = nn::layer_norm(c.h_mid, l.ln2_g, l.ln2_b, c.ln2);
    c.ff_pre = nn::linear(c.b, l.ff_w1, l.ff_b1);
    c.ff_act = nn::gelu(c.ff_pre);
    h = c.h_mid + nn::linear(c.ff_act, l.ff_w2, l.ff_b2);
  }
  cache.h_final = nn::layer_norm(h, lnf_g_, lnf_b_, cache.lnf);

  cache.argmax.resize(config_.width);
  cache.pooled.resize(config_.width);
  for (int j = 0; j < config_.width; ++j) {
    Eigen::Index row;
    cache.pooled[j] = cache.h_final.col(j).maxCoeff(&row);
    cache.argmax[j] = row;
  }
  cache.mlp_pre =
      (mlp_w1_ * cache.pooled + mlp_b1_.col(0)).eval();
  cache.mlp_act = cache.mlp_pre.unaryExpr([](double v) { return nn::gelu(v); });
  cache.out = mlp_w2_.row(0).dot(cache.mlp_act) + mlp_b2_(0, 0);
  if (!std::isfinite(cache.out))
    throw NumericError("non-finite energy");
}

double AtomTransformer::energy(const FeaturizedContext& fc) const {
  Cache cache;
  forward(fc, cache);
  return cache.out;
}

std::vector<double>
AtomTransformer::energy_batch(std::span<const FeaturizedContext> fcs) const {
  std::vector<double> out(fcs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(fcs.size()); ++i) {
    Cache cache;
    forward(fcs[i], cache);
    out[i] = cache.out;
  }
  return out;
}

void AtomTransformer::backward(const FeaturizedContext& fc, const Cache& cache,
                               double de, GradBuffer& grads,
                               MatrixXd* dcoords) const {
  const int k = config_.k;
  const int heads = config_.heads;
  const int dh = config_.width / heads;
  const int c = config_.cat_embed;
  const double scale = 1.0 / std::sqrt(double(dh));

  // Gradient slots follow the tensors() layout.
  int g = 0;
  MatrixXd& g_embed_el = grads[g++];
  MatrixXd& g_embed_label = grads[g++];
  MatrixXd& g_embed_aa = grads[g++];
  MatrixXd& g_coord_w = grads[g++];
  MatrixXd& g_coord_b = grads[g++];
  struct LayerGrads {
    MatrixXd *ln1_g, *ln1_b, *wq, *bq, *wk, *bk, *wv, *bv, *wo, *bo;
    MatrixXd *ln2_g, *ln2_b, *ff_w1, *ff_b1, *ff_w2, *ff_b2;
  };
  std::vector<LayerGrads> lg(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    lg[i].ln1_g = &grads[g++];
    lg[i].ln1_b = &grads[g++];
    lg[i].wq = &grads[g++];
    lg[i].bq = &grads[g++];
    lg[i].wk = &grads[g++];
    lg[i].bk = &grads[g++];
    lg[i].wv = &grads[g++];
    lg[i].bv = &grads[g++];
    lg[i].wo = &grads[g++];
    lg[i].bo = &grads[g++];
    lg[i].ln2_g = &grads[g++];
    lg[i].ln2_b = &grads[g++];
    lg[i].ff_w1 = &grads[g++];
    lg[i].ff_b1 = &grads[g++];
    lg[i].ff_w2 = &grads[g++];
    lg[i].ff_b2 = &grads[g++];
  }
  MatrixXd& g_lnf_g = grads[g++];
  MatrixXd& g_lnf_b = grads[g++];
  MatrixXd& g_mlp_w1 = grads[g++];
  MatrixXd& g_mlp_b1 = grads[g++];
  MatrixXd& g_mlp_w2 = grads[g++];
  MatrixXd& g_mlp_b2 = grads[g++];

  // Output head.
  g_mlp_w2.row(0) += de * cache.mlp_act.transpose();
  g_mlp_b2(0, 0) += de;
  VectorXd d_act = de * mlp_w2_.row(0).transpose();
  VectorXd d_pre(d_act.size());
  for (Eigen::Index i = 0; i < d_pre.size(); ++i)
    d_pre[i] = d_act[i] * nn::gelu_grad(cache.mlp_pre[i]);
  g_mlp_w1.noalias() += d_pre * cache.pooled.transpose();
  g_mlp_b1.col(0) += d_pre;
  VectorXd d_pooled = mlp_w1_.transpose() * d_pre;

  // Max-pool routes each column's gradient to its argmax row.
  MatrixXd dh_final = MatrixXd::Zero(k, config_.width);
  for (int j = 0; j < config_.width; ++j)
    dh_final(cache.argmax[j], j) = d_pooled[j];

  MatrixXd dx = nn::layer_norm_backward(dh_final, lnf_g_, cache.lnf, g_lnf_g,
                                        g_lnf_b);

  for (int li = int(layers_.size()) - 1; li >= 0; --li) {
    const Layer& l = layers_[li];
    const auto& cl = cache.layers[li];
    auto& gl = lg[li];

    // h_out = h_mid + ff_act * w2^T + b2
    MatrixXd d_ff_act =
        nn::linear_backward(cl.ff_act, l.ff_w2, dx, *gl.ff_w2, *gl.ff_b2);
    MatrixXd d_ff_pre =
        d_ff_act.binaryExpr(cl.ff_pre, [](double dy, double x) {
          return dy * nn::gelu_grad(x);
        });
    MatrixXd d_b =
        nn::linear_backward(cl.b, l.ff_w1, d_ff_pre, *gl.ff_w1, *gl.ff_b1);
    MatrixXd d_h_mid =
        dx + nn::layer_norm_backward(d_b, l.ln2_g, cl.ln2, *gl.ln2_g,
                                     *gl.ln2_b);

    // h_mid = h_in + concat * wo^T + bo
    MatrixXd d_concat =
        nn::linear_backward(cl.concat, l.wo, d_h_mid, *gl.wo, *gl.bo);
    MatrixXd d_q = MatrixXd::Zero(k, config_.width);
    MatrixXd d_k = MatrixXd::Zero(k, config_.width);
    MatrixXd d_v = MatrixXd::Zero(k, config_.width);
    for (int hd = 0; hd < heads; ++hd) {
      const auto qh = cl.q.middleCols(hd * dh, dh);
      const auto kh = cl.k.middleCols(hd * dh, dh);
      const auto vh = cl.v.middleCols(hd * dh, dh);
      const MatrixXd& p = cl.probs[hd];
      const auto d_oh = d_concat.middleCols(hd * dh, dh);
      MatrixXd d_p = d_oh * vh.transpose();
      d_v.middleCols(hd * dh, dh).noalias() = p.transpose() * d_oh;
      MatrixXd d_scores = nn::softmax_rows_backward(p, d_p) * scale;
      d_q.middleCols(hd * dh, dh).noalias() = d_scores * kh;
      d_k.middleCols(hd * dh, dh).noalias() = d_scores.transpose() * qh;
    }
    MatrixXd d_a = nn::linear_backward(cl.a, l.wq, d_q, *gl.wq, *gl.bq);
    d_a += nn::linear_backward(cl.a, l.wk, d_k, *gl.wk, *gl.bk);
    d_a += nn::linear_backward(cl.a, l.wv, d_v, *gl.wv, *gl.bv);
    dx = d_h_mid + nn::layer_norm_backward(d_a, l.ln1_g, cl.ln1, *gl.ln1_g,
                                           *gl.ln1_b);
  }

  // Embedding layer: scatter categorical gradients, coordinate projection.
  for (int i = 0; i < k; ++i) {
    g_embed_el.row(fc.element_idx[i]) += dx.block(i, 0, 1, c);
    g_embed_label.row(fc.label_idx[i]) += dx.block(i, c, 1, c);
    g_embed_aa.row(fc.aa_idx[i]) += dx.block(i, 2 * c, 1, c);
  }
  const MatrixXd d_proj = dx.rightCols(config_.coord_proj);
  g_coord_w.noalias() += d_proj.transpose() * fc.coords;
  g_coord_b.col(0) += d_proj.colwise().sum().transpose();
  if (dcoords)
    *dcoords = d_proj * coord_w_;
}

void AtomTransformer::backward_batch(std::span<const FeaturizedContext> fcs,
                                     std::span<const double> dL_dE,
                                     GradBuffer& grads) const {
  if (fcs.size() != dL_dE.size())
    throw std::invalid_argument("backward_batch: size mismatch");
  const int nthreads = thread_count();
  std::vector<GradBuffer> locals(nthreads);
#pragma omp parallel
  {
    GradBuffer& local = locals[thread_id()];
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

double AtomTransformer::energy_input_grad(const FeaturizedContext& fc,
                                          MatrixXd& dcoords) const {
  Cache cache;
  forward(fc, cache);
  GradBuffer grads = make_grad_buffer();
  backward(fc, cache, 1.0, grads, &dcoords);
  return cache.out;
}

VectorXd AtomTransformer::pooled_embedding(const FeaturizedContext& fc) const {
  Cache cache;
  forward(fc, cache);
  return cache.pooled;
}

double ensemble_energy(std::span<const std::unique_ptr<EnergyModel>> models,
                       const FeaturizedContext& fc) {
  if (models.empty())
    throw std::invalid_argument("ensemble_energy: no models");
  double sum = 0;
  for (const auto& m : models)
    sum += m->energy(fc);
  return sum / double(models.size());
}

} // namespace rforge
