#include "rforge/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>

#include "rforge/checkpoint.hpp"
#include "rforge/error.hpp"
#include "rforge/nce.hpp"
#include "rforge/pdb.hpp"

namespace rforge {

namespace fs = std::filesystem;

TrainSample build_sample(const Structure& s, const ResidueRecord& residue,
                         const RotamerLibrary& lib,
                         const ChiDefinitionTable& table, int n_negatives,
                         int k, Rng& rng) {
  if (!residue.complete || residue.chi.empty())
    throw IncompleteResidueError("build_sample: residue " +
                                 std::to_string(residue.residue_index) +
                                 " is not rotameric/complete");
  if (!residue.phi || !residue.psi)
    throw Error("build_sample: backbone torsions undefined");

  TrainSample sample;
  sample.positive = knn_context(s, residue, k);
  if (n_negatives == 0)
    return sample;

  const auto draws = sample_training(lib, residue.amino_acid, *residue.phi,
                                     *residue.psi, n_negatives, rng);
  sample.negatives.reserve(draws.size());
  for (const auto& draw : draws) {
    const ResidueRecord rebuilt = apply_chi(residue, draw.chi, table);
    sample.negatives.push_back(knn_context(s, residue, rebuilt, k));
  }
  return sample;
}

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(const std::vector<NamedTensor>& params,
                const GradBuffer& grads) {
  if (params.size() != grads.size())
    throw std::invalid_argument("Adam::step: shape mismatch");
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Eigen::MatrixXd::Zero(p.tensor->rows(), p.tensor->cols()));
      v_.push_back(Eigen::MatrixXd::Zero(p.tensor->rows(), p.tensor->cols()));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = m_[i];
    auto& v = v_[i];
    const auto& g = grads[i];
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    const Eigen::ArrayXXd mhat = m.array() / bc1;
    const Eigen::ArrayXXd vhat = v.array() / bc2;
    params[i].tensor->array() -= lr_ * mhat / (vhat.sqrt() + eps_);
  }
}

std::size_t TrainCorpus::total_eligible() const {
  std::size_t n = 0;
  for (const auto& v : eligible)
    n += v.size();
  return n;
}

std::vector<ResidueRef> eligible_residues(const Structure& s, int k) {
  std::vector<ResidueRef> out;
  if (s.atom_count() < static_cast<std::size_t>(k))
    return out;
  for (int c = 0; c < static_cast<int>(s.chains.size()); ++c) {
    const auto& residues = s.chains[c].residues;
    for (int r = 0; r < static_cast<int>(residues.size()); ++r) {
      const auto& res = residues[r];
      if (is_rotameric_for_prediction(res.amino_acid) && res.complete &&
          res.phi && res.psi)
        out.push_back({c, r});
    }
  }
  return out;
}

TrainCorpus load_corpus(const DatasetManifest& manifest, Split split,
                        const fs::path& base_dir, int k) {
  TrainCorpus corpus;
  for (const auto& e : manifest.entries) {
    if (e.split != split)
      continue;
    fs::path p = e.path.empty() ? base_dir / (e.id + ".pdb")
                                : base_dir / e.path;
    Structure s = parse_pdb_file(p);
    if (s.id.empty())
      s.id = e.id;
    corpus.eligible.push_back(eligible_residues(s, k));
    corpus.structures.push_back(std::move(s));
  }
  return corpus;
}

namespace {

struct PickedResidue {
  int structure;
  ResidueRef ref;
};

// Deterministic residue picks for one step, independent of thread count.
std::vector<PickedResidue> pick_batch(const TrainCorpus& corpus,
                                      const TrainConfig& cfg, int step,
                                      const std::vector<PickedResidue>& all) {
  std::vector<PickedResidue> batch;
  batch.reserve(cfg.batch_size);
  if (cfg.exhaustive) {
    const std::size_t total = all.size();
    for (int i = 0; i < cfg.batch_size; ++i)
      batch.push_back(
          all[(std::size_t(step) * cfg.batch_size + i) % total]);
    return batch;
  }
  Rng rng(derive_seed(cfg.seed, 0x1000000 + step));
  for (int i = 0; i < cfg.batch_size; ++i) {
    const int s = static_cast<int>(rng.uniform_index(corpus.structures.size()));
    const auto& elig = corpus.eligible[s];
    if (elig.empty()) {
      --i; // structure with no eligible residues; redraw
      continue;
    }
    batch.push_back({s, elig[rng.uniform_index(elig.size())]});
  }
  return batch;
}

struct BatchLoss {
  double loss = 0;
  std::vector<FeaturizedContext> fcs;
  std::vector<double> dL_dE;
};

// Builds, featurizes and scores one batch; fills per-context loss gradients
// scaled for the batch mean.
BatchLoss evaluate_batch(EnergyModel& model, const TrainConfig& cfg,
                         const TrainCorpus& corpus,
                         const std::vector<PickedResidue>& picks,
                         const RotamerLibrary& lib,
                         const ChiDefinitionTable& table, std::uint64_t salt,
                         bool with_grad) {
  const int k = model.config().k;
  const int group = cfg.negatives + 1;
  BatchLoss out;
  out.fcs.resize(picks.size() * group);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(picks.size()); ++i) {
    Rng rng(derive_seed(cfg.seed, salt * 0x100000 + i));
    const auto& pick = picks[i];
    const Structure& s = corpus.structures[pick.structure];
    const ResidueRecord& res = corpus.residue(pick.structure, pick.ref);
    TrainSample sample =
        build_sample(s, res, lib, table, cfg.negatives, k, rng);
    // One fresh rotation per context per step, shared with its negatives.
    const Rotation rot = Rotation::random(rng);
    out.fcs[i * group] = featurize(sample.positive, rot);
    for (int n = 0; n < cfg.negatives; ++n)
      out.fcs[i * group + n + 1] = featurize(sample.negatives[n], rot);
  }

  const std::vector<double> energies = model.energy_batch(out.fcs);
  out.dL_dE.assign(out.fcs.size(), 0.0);
  const double scale = 1.0 / double(picks.size());
  for (std::size_t i = 0; i < picks.size(); ++i) {
    const double e_pos = energies[i * group];
    std::span<const double> e_negs(energies.data() + i * group + 1,
                                   cfg.negatives);
    if (with_grad) {
      NceGradient g;
      out.loss += nce_loss_with_grad(e_pos, e_negs, g) * scale;
      out.dL_dE[i * group] = g.d_pos * scale;
      for (int n = 0; n < cfg.negatives; ++n)
        out.dL_dE[i * group + n + 1] = g.d_negs[n] * scale;
    } else {
      out.loss += nce_loss(e_pos, e_negs) * scale;
    }
  }
  return out;
}

} // namespace

TrainResult train(EnergyModel& model, const TrainConfig& config,
                  const TrainCorpus& corpus, const TrainCorpus* validation,
                  const RotamerLibrary& lib, const ChiDefinitionTable& table,
                  const fs::path& out_dir) {
  if (corpus.total_eligible() == 0)
    throw Error("train: corpus has no eligible residues");
  fs::create_directories(out_dir);

  TrainResult result;
  result.metrics_path = out_dir / "metrics.tsv";
  std::ofstream metrics(result.metrics_path);
  if (!metrics)
    throw Error("cannot write metrics log " + result.metrics_path.string());
  char head[256];
  std::snprintf(head, sizeof(head),
                "# train lr=%g beta1=%g beta2=%g batch=%d negatives=%d "
                "steps=%d seed=%llu arch=%s params=%zu\n",
                config.learning_rate, config.beta1, config.beta2,
                config.batch_size, config.negatives, config.total_steps,
                static_cast<unsigned long long>(config.seed),
                model.architecture().c_str(), model.parameter_count());
  metrics << head << "step\tloss\tval_loss\tlr\twall_ms\n";

  // Deterministic enumeration order for exhaustive mode.
  std::vector<PickedResidue> all;
  for (int s = 0; s < static_cast<int>(corpus.structures.size()); ++s)
    for (const auto& ref : corpus.eligible[s])
      all.push_back({s, ref});
  if (config.exhaustive) {
    Rng shuffle_rng(derive_seed(config.seed, 0xe));
    for (std::size_t i = all.size(); i > 1; --i)
      std::swap(all[i - 1], all[shuffle_rng.uniform_index(i)]);
  }

  Adam adam(config.learning_rate, config.beta1, config.beta2, config.adam_eps);
  const auto params = model.tensors();
  GradBuffer grads = model.make_grad_buffer();
  fs::path last_checkpoint;

  std::vector<PickedResidue> fixed_picks;
  std::deque<double> loss_window;
  const auto t0 = std::chrono::steady_clock::now();
  for (int step = 1; step <= config.total_steps; ++step) {
    std::vector<PickedResidue> picks;
    if (config.fixed_batch) {
      if (fixed_picks.empty())
        fixed_picks = pick_batch(corpus, config, 1, all);
      picks = fixed_picks;
    } else {
      picks = pick_batch(corpus, config, step, all);
    }
    const std::uint64_t salt = config.fixed_batch ? 1 : step;

    BatchLoss batch = evaluate_batch(model, config, corpus, picks, lib, table,
                                     salt, /*with_grad=*/true);
    if (!std::isfinite(batch.loss)) {
      metrics << "# aborted: non-finite loss at step " << step << "\n";
      result.final_checkpoint = last_checkpoint;
      throw NumericError("training aborted: non-finite loss at step " +
                         std::to_string(step));
    }
    for (auto& g : grads)
      g.setZero();
    model.backward_batch(batch.fcs, batch.dL_dE, grads);
    adam.step(params, grads);

    if (step == 1)
      result.initial_loss = batch.loss;
    result.final_loss = batch.loss;
    loss_window.push_back(batch.loss);
    if (loss_window.size() > 10)
      loss_window.pop_front();
    result.final_loss_window = 0;
    for (double l : loss_window)
      result.final_loss_window += l;
    result.final_loss_window /= double(loss_window.size());
    result.steps = step;

    std::string val_field = "-";
    if (validation && validation->total_eligible() > 0 &&
        config.validate_every > 0 &&
        (step % config.validate_every == 0 || step == config.total_steps)) {
      TrainConfig vcfg = config;
      vcfg.batch_size = config.val_batch;
      std::vector<PickedResidue> vall;
      for (int s = 0; s < static_cast<int>(validation->structures.size()); ++s)
        for (const auto& ref : validation->eligible[s])
          vall.push_back({s, ref});
      std::vector<PickedResidue> vpicks;
      Rng vrng(derive_seed(config.seed, 0x7a1 + step));
      for (int i = 0; i < vcfg.batch_size; ++i)
        vpicks.push_back(vall[vrng.uniform_index(vall.size())]);
      BatchLoss vb = evaluate_batch(model, vcfg, *validation, vpicks, lib,
                                    table, 0xa0000 + step, false);
      result.final_val_loss = vb.loss;
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.8g", vb.loss);
      val_field = buf;
    }

    const auto now = std::chrono::steady_clock::now();
    const long wall_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(now - t0)
            .count();
    char line[192];
    std::snprintf(line, sizeof(line), "%d\t%.8g\t%s\t%g\t%ld\n", step,
                  batch.loss, val_field.c_str(), config.learning_rate,
                  wall_ms);
    metrics << line;
    metrics.flush();

    if (config.checkpoint_every > 0 &&
        (step % config.checkpoint_every == 0 || step == config.total_steps)) {
      fs::path p = out_dir / ("checkpoint_" + std::to_string(step) + ".ckpt");
      save_checkpoint(model, p);
      last_checkpoint = p;
    }
  }

  if (last_checkpoint.empty()) {
    last_checkpoint = out_dir / "checkpoint_final.ckpt";
    save_checkpoint(model, last_checkpoint);
  }
  result.final_checkpoint = last_checkpoint;
  return result;
}

} // namespace rforge
