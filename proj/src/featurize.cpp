#include "rforge/error.hpp"
#include "rforge/model.hpp"

namespace rforge {

void ModelConfig::validate() const {
  if (layers < 1 || width < 1 || heads < 1 || ff_width < 1 || cat_embed < 1 ||
      coord_proj < 1 || mlp_hidden < 1 || k < 1)
    throw ConfigError("model config fields must be positive");
  if (3 * cat_embed + coord_proj != width)
    throw ConfigError("3 * cat_embed + coord_proj must equal width (" +
                      std::to_string(3 * cat_embed + coord_proj) +
                      " != " + std::to_string(width) + ")");
  if (width % heads != 0)
    throw ConfigError("width " + std::to_string(width) +
                      " is not divisible by heads " + std::to_string(heads));
}

FeaturizedContext featurize(const AtomContext& ctx, const Rotation& rotation) {
  const int k = static_cast<int>(ctx.atoms.size());
  FeaturizedContext fc;
  fc.coords.resize(k, 3);
  fc.element_idx.reserve(k);
  fc.label_idx.reserve(k);
  fc.aa_idx.reserve(k);

  Vec3 mean = Vec3::Zero();
  for (const auto& a : ctx.atoms)
    mean += a.coords;
  mean /= double(k);

  for (int i = 0; i < k; ++i) {
    const ContextAtom& a = ctx.atoms[i];
    const int el = static_cast<int>(a.element);
    const int label = static_cast<int>(a.label);
    const int aa = static_cast<int>(a.amino_acid);
    if (el < 0 || el >= kNumElements || label < 0 || label >= kNumAtomLabels ||
        aa < 0 || aa >= kNumAminoAcids)
      throw Error("atom attribute outside the fixed vocabulary");
    fc.element_idx.push_back(el);
    fc.label_idx.push_back(label);
    fc.aa_idx.push_back(aa);
    fc.coords.row(i) = rotation.apply(a.coords - mean).transpose();
  }
  return fc;
}

std::size_t EnergyModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : const_cast<EnergyModel*>(this)->tensors())
    n += static_cast<std::size_t>(t.tensor->size());
  return n;
}

GradBuffer EnergyModel::make_grad_buffer() const {
  GradBuffer g;
  for (const auto& t : const_cast<EnergyModel*>(this)->tensors())
    g.push_back(Eigen::MatrixXd::Zero(t.tensor->rows(), t.tensor->cols()));
  return g;
}

} // namespace rforge
