#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rforge/context.hpp"
#include "rforge/geometry.hpp"
#include "rforge/types.hpp"

namespace rforge {

struct ModelConfig {
  int layers = 6;
  int width = 256;      // model width; equals 3 * cat_embed + coord_proj
  int heads = 8;
  int ff_width = 1024;
  int cat_embed = 28;   // width of each categorical embedding
  int coord_proj = 172; // width of the coordinate projection
  int mlp_hidden = 256; // hidden units of the output MLP
  int k = 64;           // atoms per context

  void validate() const; // throws ConfigError

  // Desk-scale variant used by tests: 2 layers, width 128.
  static ModelConfig reduced() {
    ModelConfig c;
    c.layers = 2;
    c.width = 128;
    c.heads = 8;
    c.ff_width = 512;
    c.cat_embed = 14;
    c.coord_proj = 86;
    c.mlp_hidden = 128;
    return c;
  }
};

// Model-ready view of an AtomContext: categorical indices plus coordinates
// centered to zero mean and rotated.
struct FeaturizedContext {
  Eigen::MatrixXd coords; // k x 3
  std::vector<int> element_idx;
  std::vector<int> label_idx;
  std::vector<int> aa_idx;

  int size() const { return static_cast<int>(element_idx.size()); }
};

FeaturizedContext featurize(const AtomContext& ctx, const Rotation& rotation);

struct NamedTensor {
  std::string name;
  Eigen::MatrixXd* tensor;
};

using GradBuffer = std::vector<Eigen::MatrixXd>;

// Scalar energy function over featurized atom sets, trainable via
// per-context dL/dE weights.
class EnergyModel {
public:
  virtual ~EnergyModel() = default;

  virtual std::string architecture() const = 0;
  virtual const ModelConfig& config() const = 0;
  virtual std::vector<NamedTensor> tensors() = 0;

  virtual double energy(const FeaturizedContext& fc) const = 0;
  // Order-preserving; equals the scalar path item-wise.
  virtual std::vector<double>
  energy_batch(std::span<const FeaturizedContext> fcs) const = 0;

  // Accumulates sum_i dL_dE[i] * dE_i/dtheta into grads (shaped like
  // tensors()).
  virtual void backward_batch(std::span<const FeaturizedContext> fcs,
                              std::span<const double> dL_dE,
                              GradBuffer& grads) const = 0;

  // Energy plus its gradient w.r.t. the featurized coordinates (k x 3).
  virtual double energy_input_grad(const FeaturizedContext& fc,
                                   Eigen::MatrixXd& dcoords) const = 0;

  // Pooled hidden vector feeding the output head (width-sized).
  virtual Eigen::VectorXd pooled_embedding(const FeaturizedContext& fc) const = 0;

  std::size_t parameter_count() const;
  GradBuffer make_grad_buffer() const;
};

class AtomTransformer final : public EnergyModel {
public:
  AtomTransformer(const ModelConfig& config, std::uint64_t seed);

  std::string architecture() const override { return "atom_transformer"; }
  const ModelConfig& config() const override { return config_; }
  std::vector<NamedTensor> tensors() override;

  double energy(const FeaturizedContext& fc) const override;
  std::vector<double>
  energy_batch(std::span<const FeaturizedContext> fcs) const override;
  void backward_batch(std::span<const FeaturizedContext> fcs,
                      std::span<const double> dL_dE,
                      GradBuffer& grads) const override;
  double energy_input_grad(const FeaturizedContext& fc,
                           Eigen::MatrixXd& dcoords) const override;
  Eigen::VectorXd pooled_embedding(const FeaturizedContext& fc) const override;

private:
  struct Layer {
    Eigen::MatrixXd ln1_g, ln1_b, ln2_g, ln2_b;
    Eigen::MatrixXd wq, bq, wk, bk, wv, bv, wo, bo;
    Eigen::MatrixXd ff_w1, ff_b1, ff_w2, ff_b2;
  };
  struct Cache;

  void forward(const FeaturizedContext& fc, Cache& cache) const;
  void backward(const FeaturizedContext& fc, const Cache& cache, double de,
                GradBuffer& grads, Eigen::MatrixXd* dcoords) const;
  Eigen::MatrixXd embed(const FeaturizedContext& fc) const;

  ModelConfig config_;
  Eigen::MatrixXd embed_element_, embed_label_, embed_aa_;
  Eigen::MatrixXd coord_w_, coord_b_;
  std::vector<Layer> layers_;
  Eigen::MatrixXd lnf_g_, lnf_b_;
  Eigen::MatrixXd mlp_w1_, mlp_b1_, mlp_w2_, mlp_b2_;

  friend class Checkpoint;
};

// Baseline without attention: per-atom embeddings are down-projected and
// flattened, passed through three dense layers, a residual block applied to
// each width-sized group of the hidden vector, groups mean-pooled, then a
// final dense layer produces the scalar. The down-projection keeps the
// flattened dense layer near the 10M-parameter budget.
class FcModel final : public EnergyModel {
public:
  FcModel(const ModelConfig& config, std::uint64_t seed);

  std::string architecture() const override { return "fully_connected"; }
  const ModelConfig& config() const override { return config_; }
  std::vector<NamedTensor> tensors() override;

  double energy(const FeaturizedContext& fc) const override;
  std::vector<double>
  energy_batch(std::span<const FeaturizedContext> fcs) const override;
  void backward_batch(std::span<const FeaturizedContext> fcs,
                      std::span<const double> dL_dE,
                      GradBuffer& grads) const override;
  double energy_input_grad(const FeaturizedContext& fc,
                           Eigen::MatrixXd& dcoords) const override;
  Eigen::VectorXd pooled_embedding(const FeaturizedContext& fc) const override;

  int dense_width() const { return dense_width_; }
  int down_proj() const { return down_proj_; }

private:
  struct Cache;
  void forward(const FeaturizedContext& fc, Cache& cache) const;
  void backward(const FeaturizedContext& fc, const Cache& cache, double de,
                GradBuffer& grads, Eigen::MatrixXd* dcoords) const;
  Eigen::MatrixXd embed(const FeaturizedContext& fc) const;

  ModelConfig config_;
  int down_proj_;    // per-atom width before flattening (width / 2)
  int dense_width_;  // hidden width of the dense stack (4 * width)
  Eigen::MatrixXd embed_element_, embed_label_, embed_aa_;
  Eigen::MatrixXd coord_w_, coord_b_;
  Eigen::MatrixXd down_w_, down_b_;
  Eigen::MatrixXd d1_w_, d1_b_, d2_w_, d2_b_, d3_w_, d3_b_;
  Eigen::MatrixXd res_w1_, res_b1_, res_w2_, res_b2_;
  Eigen::MatrixXd out_w_, out_b_;

  friend class Checkpoint;
};

// Arithmetic mean of member energies. Members must share a config.
double ensemble_energy(std::span<const std::unique_ptr<EnergyModel>> models,
                       const FeaturizedContext& fc);

} // namespace rforge
