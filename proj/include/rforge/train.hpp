#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "rforge/chi_table.hpp"
#include "rforge/context.hpp"
#include "rforge/dataset.hpp"
#include "rforge/model.hpp"
#include "rforge/rotamer_library.hpp"
#include "rforge/structure.hpp"

namespace rforge {

struct TrainConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.99;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 64; // contexts per optimizer step
  int negatives = 128; // N library rotamers per context
  int total_steps = 1000;
  std::uint64_t seed = 0;
  int checkpoint_every = 500;
  int validate_every = 100;
  int val_batch = 32;      // residues per validation pass
  bool exhaustive = false; // enumerate residues instead of uniform sampling
  bool fixed_batch = false; // reuse the first batch every step (overfit runs)
};

// A positive context plus N negatives sharing its backbone; negatives
// substitute library-sampled side chains and re-extract the k-NN set.
struct TrainSample {
  AtomContext positive;
  std::vector<AtomContext> negatives;
};

TrainSample build_sample(const Structure& s, const ResidueRecord& residue,
                         const RotamerLibrary& lib,
                         const ChiDefinitionTable& table, int n_negatives,
                         int k, Rng& rng);

class Adam {
public:
  Adam(double lr, double beta1, double beta2, double eps);
  void step(const std::vector<NamedTensor>& params, const GradBuffer& grads);
  int steps_taken() const { return t_; }

private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<Eigen::MatrixXd> m_, v_;
};

struct ResidueRef {
  int chain;
  int residue;
};

struct TrainCorpus {
  std::vector<Structure> structures;
  std::vector<std::vector<ResidueRef>> eligible; // per structure

  std::size_t total_eligible() const;
  const ResidueRecord& residue(int s, const ResidueRef& ref) const {
    return structures[s].chains[ref.chain].residues[ref.residue];
  }
};

// Residues eligible for training/evaluation: one of the 16 predicted types,
// complete, phi and psi defined, in a structure with at least k atoms.
std::vector<ResidueRef> eligible_residues(const Structure& s, int k);

// Loads every structure of the manifest split. Paths resolve relative to
// base_dir; entries without a path load base_dir/<id>.pdb.
TrainCorpus load_corpus(const DatasetManifest& manifest, Split split,
                        const std::filesystem::path& base_dir, int k);

struct TrainResult {
  double initial_loss = 0;
  double final_loss = 0;          // last step's batch loss
  double final_loss_window = 0;   // mean over the last 10 steps
  std::optional<double> final_val_loss;
  int steps = 0;
  std::filesystem::path final_checkpoint;
  std::filesystem::path metrics_path;
};

// Contrastive training loop: Adam on mini-batch means of the per-context
// loss, one fresh random rotation per context per step, periodic validation
// and atomic checkpoints under out_dir. Aborts on non-finite loss, keeping
// the last checkpoint.
TrainResult train(EnergyModel& model, const TrainConfig& config,
                  const TrainCorpus& corpus, const TrainCorpus* validation,
                  const RotamerLibrary& lib, const ChiDefinitionTable& table,
                  const std::filesystem::path& out_dir);

} // namespace rforge
