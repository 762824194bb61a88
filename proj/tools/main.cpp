// rotamer-forge: train and evaluate an atomic energy model of protein
// side-chain conformations.
//
// Subcommands: prepare-data, train, evaluate, analyze (scan|saliency|embed),
// inspect-checkpoint. Every subcommand accepts --config <file> (INI: flag
// names as keys, subcommands as sections); command-line flags override
// ROTAMER_FORGE_THREADS and config-file values. The resolved configuration
// is echoed into the output directory.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "rforge/analysis.hpp"
#include "rforge/checkpoint.hpp"
#include "rforge/chi_table.hpp"
#include "rforge/dataset.hpp"
#include "rforge/error.hpp"
#include "rforge/evaluate.hpp"
#include "rforge/pdb.hpp"
#include "rforge/train.hpp"

namespace fs = std::filesystem;
using namespace rforge;

namespace {

struct CommonOpts {
  int threads = 0;
  std::string out;
};

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0)
    omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

void echo_config(CLI::App& app, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream echo(out_dir / "run_config.ini");
  echo << app.config_to_str(true, true);
}

ChiDefinitionTable load_chi_table(const std::string& path) {
  if (path.empty())
    return ChiDefinitionTable::standard();
  return ChiDefinitionTable::load(path);
}

const ResidueRecord* find_residue(const Structure& s, char chain_id,
                                  int index) {
  for (const auto& chain : s.chains)
    if (chain.id == chain_id)
      for (const auto& r : chain.residues)
        if (r.residue_index == index)
          return &r;
  return nullptr;
}

std::pair<char, int> parse_residue_ref(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos || colon + 1 >= spec.size() || colon != 1)
    throw Error("residue reference must look like A:42");
  return {spec[0], std::stoi(spec.substr(colon + 1))};
}

int run_prepare_data(const std::string& pdb_dir, const CommonOpts& common,
                     double resolution_max, double rvalue_max,
                     double val_fraction, std::uint64_t seed,
                     const std::string& exclude_file) {
  std::unordered_set<std::string> excluded;
  if (!exclude_file.empty()) {
    std::ifstream in(exclude_file);
    if (!in)
      throw Error("cannot read exclusion file " + exclude_file);
    std::string id;
    while (in >> id)
      excluded.insert(id);
  }

  std::vector<StructureMeta> metas;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(pdb_dir))
    if (entry.path().extension() == ".pdb")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  int parse_failures = 0;
  for (const auto& p : files) {
    try {
      const Structure s = parse_pdb_file(p);
      StructureMeta meta;
      meta.id = s.id.empty() ? p.stem().string() : s.id;
      meta.resolution = s.resolution;
      meta.r_value = s.r_value;
      meta.path = fs::absolute(p).string();
      metas.push_back(std::move(meta));
    } catch (const ParseError& e) {
      std::cerr << "warning: skipping " << p << ": " << e.what() << "\n";
      ++parse_failures;
    }
  }

  FilterOptions opts;
  opts.resolution_max = resolution_max;
  opts.r_value_max = rvalue_max;
  opts.validation_fraction = val_fraction;
  opts.seed = seed;
  const DatasetManifest manifest = filter_dataset(metas, excluded, opts);

  const fs::path out_dir(common.out);
  fs::create_directories(out_dir);
  write_manifest(manifest, out_dir / "manifest.tsv");

  int train = 0, val = 0, excl = 0;
  for (const auto& e : manifest.entries) {
    train += e.split == Split::Train;
    val += e.split == Split::Validation;
    excl += e.split == Split::Excluded;
  }
  std::printf("scanned %zu files: kept %zu (train %d, validation %d, "
              "excluded %d), dropped %zu, missing metadata %d, parse "
              "failures %d\n",
              files.size(), manifest.entries.size(), train, val, excl,
              files.size() - manifest.entries.size() - parse_failures,
              manifest.missing_metadata, parse_failures);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"rotamer-forge: atomic energy model of protein side chains"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI config file (sections per subcommand)");
  app.set_version_flag("--version", "rotamer-forge 1.0.0");

  CommonOpts common;

  // --- prepare-data ---------------------------------------------------
  auto* prep = app.add_subcommand(
      "prepare-data", "Scan a directory of PDB files into a dataset manifest");
  std::string prep_pdb_dir;
  double prep_resolution_max = 1.8, prep_rvalue_max = 0.25,
         prep_val_fraction = 0.05;
  std::uint64_t prep_seed = 0;
  std::string prep_exclude;
  prep->add_option("--pdb-dir", prep_pdb_dir, "Directory of .pdb files")
      ->required();
  prep->add_option("--out", common.out, "Output directory")->required();
  prep->add_option("--resolution-max", prep_resolution_max,
                   "Keep structures with resolution strictly below (A)");
  prep->add_option("--rvalue-max", prep_rvalue_max,
                   "Keep structures with R value strictly below");
  prep->add_option("--val-fraction", prep_val_fraction,
                   "Fraction of kept structures assigned to validation");
  prep->add_option("--seed", prep_seed, "Split hash seed");
  prep->add_option("--exclude-file", prep_exclude,
                   "File of structure ids to mark excluded");

  // --- train ------------------------------------------------------------
  auto* tr = app.add_subcommand("train", "Train an energy model");
  std::string tr_manifest, tr_lib, tr_arch = "transformer", tr_chi_table;
  ModelConfig tr_model; // defaults
  TrainConfig tr_cfg;
  std::uint64_t tr_model_seed = 1;
  tr->add_option("--data,--manifest", tr_manifest, "Dataset manifest")
      ->required();
  tr->add_option("--rotamer-lib", tr_lib, "Rotamer library file")->required();
  tr->add_option("--out", common.out, "Output directory")->required();
  tr->add_option("--arch", tr_arch, "Architecture: transformer | fc")
      ->check(CLI::IsMember({"transformer", "fc"}));
  tr->add_option("--chi-table", tr_chi_table,
                 "Chi definition table (default: built-in)");
  tr->add_option("--layers", tr_model.layers, "Encoder blocks");
  tr->add_option("--width", tr_model.width, "Model width");
  tr->add_option("--heads", tr_model.heads, "Attention heads");
  tr->add_option("--ff-width", tr_model.ff_width, "Feed-forward width");
  tr->add_option("--cat-embed", tr_model.cat_embed,
                 "Categorical embedding width");
  tr->add_option("--coord-proj", tr_model.coord_proj,
                 "Coordinate projection width");
  tr->add_option("--mlp-hidden", tr_model.mlp_hidden, "Output MLP hidden");
  tr->add_option("--k", tr_model.k, "Atoms per context");
  tr->add_option("--learning-rate", tr_cfg.learning_rate, "Adam step size");
  tr->add_option("--beta1", tr_cfg.beta1, "Adam beta1");
  tr->add_option("--beta2", tr_cfg.beta2, "Adam beta2");
  tr->add_option("--batch-size", tr_cfg.batch_size, "Contexts per step");
  tr->add_option("--negatives", tr_cfg.negatives,
                 "Rotamer-library negatives per context");
  tr->add_option("--steps", tr_cfg.total_steps, "Optimizer steps");
  tr->add_option("--seed", tr_cfg.seed, "Training seed");
  tr->add_option("--model-seed", tr_model_seed, "Initialization seed");
  tr->add_option("--checkpoint-every", tr_cfg.checkpoint_every,
                 "Checkpoint cadence (steps)");
  tr->add_option("--validate-every", tr_cfg.validate_every,
                 "Validation cadence (steps)");
  tr->add_option("--val-batch", tr_cfg.val_batch,
                 "Residues per validation pass");
  tr->add_flag("--exhaustive", tr_cfg.exhaustive,
               "Enumerate residues instead of uniform sampling");

  // --- evaluate -----------------------------------------------------------
  auto* ev = app.add_subcommand("evaluate", "Run the rotamer-recovery benchmark");
  std::vector<std::string> ev_checkpoints;
  std::string ev_manifest, ev_lib, ev_protocol = "discrete", ev_chi_table,
              ev_split = "test";
  EvalOptions ev_opts;
  ev->add_option("--checkpoints", ev_checkpoints,
                 "One checkpoint, or several to ensemble")
      ->required()
      ->expected(-1);
  ev->add_option("--test-manifest", ev_manifest, "Manifest of structures")
      ->required();
  ev->add_option("--split", ev_split,
                 "Manifest split to evaluate (test/train/validation)");
  ev->add_option("--rotamer-lib", ev_lib, "Rotamer library file")->required();
  ev->add_option("--out", common.out, "Output directory")->required();
  ev->add_option("--protocol", ev_protocol, "discrete | continuous")
      ->check(CLI::IsMember({"discrete", "continuous"}));
  ev->add_option("--chi-table", ev_chi_table, "Chi definition table");
  ev->add_option("--rotations", ev_opts.rotations,
                 "Scoring rotations per residue");
  ev->add_option("--eval-samples", ev_opts.eval_samples,
                 "Continuous-protocol draws per residue");
  ev->add_option("--seed", ev_opts.seed, "Evaluation seed");
  bool ev_no_symmetry = false;
  ev->add_flag("--no-symmetry", ev_no_symmetry,
               "Disable 180-degree symmetric-chi equivalence");

  // --- analyze -----------------------------------------------------------
  auto* an = app.add_subcommand("analyze", "Model introspection tools");
  an->require_subcommand(1);
  std::string an_checkpoint, an_pdb, an_residue, an_chi_table;
  std::uint64_t an_seed = 0;
  auto add_an_common = [&](CLI::App* sub, bool needs_residue) {
    sub->add_option("--checkpoint", an_checkpoint, "Model checkpoint")
        ->required();
    sub->add_option("--pdb", an_pdb, "Structure file")->required();
    sub->add_option("--out", common.out, "Output directory")->required();
    sub->add_option("--chi-table", an_chi_table, "Chi definition table");
    sub->add_option("--seed", an_seed, "Rotation seed");
    if (needs_residue)
      sub->add_option("--residue", an_residue, "Residue as chain:index")
          ->required();
  };
  auto* an_scan = an->add_subcommand("scan", "Chi-perturbation energy scan");
  int scan_chi = 1, scan_rotations = kDefaultScanRotations;
  double scan_step = 5.0;
  add_an_common(an_scan, true);
  an_scan->add_option("--chi", scan_chi, "1-based chi index");
  an_scan->add_option("--step", scan_step, "Grid step (degrees)");
  an_scan->add_option("--rotations", scan_rotations, "Rotations to average");
  auto* an_sal = an->add_subcommand("saliency", "Per-atom gradient magnitudes");
  add_an_common(an_sal, true);
  auto* an_embed = an->add_subcommand("embed", "Per-residue context embeddings");
  add_an_common(an_embed, false);

  // --- inspect-checkpoint --------------------------------------------------
  auto* insp = app.add_subcommand("inspect-checkpoint",
                                  "Print checkpoint header and size");
  std::string insp_path;
  insp->add_option("path", insp_path, "Checkpoint file")->required();

  // Threads: flag wins over ROTAMER_FORGE_THREADS, which wins over config.
  for (CLI::App* sub : {prep, tr, ev, an_scan, an_sal, an_embed})
    sub->add_option("--threads", common.threads, "Worker threads")
        ->envname("ROTAMER_FORGE_THREADS");

  // Let --config (and other parent flags) appear after the subcommand name.
  for (CLI::App* sub : {prep, tr, ev, an, insp})
    sub->fallthrough();
  for (CLI::App* sub : {an_scan, an_sal, an_embed})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    apply_threads(common.threads);

    if (prep->parsed()) {
      echo_config(app, common.out);
      return run_prepare_data(prep_pdb_dir, common, prep_resolution_max,
                              prep_rvalue_max, prep_val_fraction, prep_seed,
                              prep_exclude);
    }

    if (tr->parsed()) {
      echo_config(app, common.out);
      const auto table = load_chi_table(tr_chi_table);
      const auto manifest = read_manifest(tr_manifest);
      const auto lib = RotamerLibrary::parse_file(tr_lib);
      const TrainCorpus corpus =
          load_corpus(manifest, Split::Train,
                      fs::path(tr_manifest).parent_path(), tr_model.k);
      const TrainCorpus val =
          load_corpus(manifest, Split::Validation,
                      fs::path(tr_manifest).parent_path(), tr_model.k);
      std::unique_ptr<EnergyModel> model;
      if (tr_arch == "transformer")
        model = std::make_unique<AtomTransformer>(tr_model, tr_model_seed);
      else
        model = std::make_unique<FcModel>(tr_model, tr_model_seed);
      std::printf("training %s with %zu parameters on %zu structures "
                  "(%zu residues)\n",
                  model->architecture().c_str(), model->parameter_count(),
                  corpus.structures.size(), corpus.total_eligible());
      const TrainResult result =
          train(*model, tr_cfg, corpus, val.structures.empty() ? nullptr : &val,
                lib, table, common.out);
      std::printf("step %d: loss %.6f -> %.6f; checkpoint %s\n", result.steps,
                  result.initial_loss, result.final_loss,
                  result.final_checkpoint.string().c_str());
      return 0;
    }

    if (ev->parsed()) {
      echo_config(app, common.out);
      const auto table = load_chi_table(ev_chi_table);
      const auto lib = RotamerLibrary::parse_file(ev_lib);
      const auto manifest = read_manifest(ev_manifest);
      const auto split = split_from_string(ev_split);
      if (!split)
        throw Error("unknown split '" + ev_split + "'");
      ev_opts.protocol = ev_protocol == "discrete" ? Protocol::Discrete
                                                   : Protocol::Continuous;
      ev_opts.symmetry_aware = !ev_no_symmetry;

      std::vector<std::unique_ptr<EnergyModel>> models;
      for (const auto& p : ev_checkpoints)
        models.push_back(load_checkpoint(p));
      ev_opts.k = models.front()->config().k;
      std::vector<const EnergyModel*> model_ptrs;
      for (const auto& m : models)
        model_ptrs.push_back(m.get());
      const ModelScorer scorer(model_ptrs);

      const TrainCorpus corpus = load_corpus(manifest, *split,
                      fs::path(ev_manifest).parent_path(), ev_opts.k);
      if (corpus.structures.empty())
        throw Error("no structures in split '" + ev_split + "'");

      std::vector<ResidueResult> results;
      std::vector<SkippedResidue> skipped;
      for (const auto& s : corpus.structures) {
        EvalOutput out = recover_rotamers(scorer, s, lib, table, ev_opts);
        results.insert(results.end(), out.results.begin(), out.results.end());
        skipped.insert(skipped.end(), out.skipped.begin(), out.skipped.end());
      }
      if (results.empty())
        throw Error("no residues evaluated");
      const RecoveryReport report = aggregate(results);

      const fs::path out_dir(common.out);
      nlohmann::json j = report_json(report);
      j["protocol"] = ev_protocol;
      j["n_skipped"] = skipped.size();
      std::ofstream(out_dir / "report.json") << j.dump(2) << "\n";
      std::ofstream(out_dir / "residues.csv") << results_csv(results);
      std::ofstream skiplog(out_dir / "skipped.csv");
      skiplog << "id,aa,reason\n";
      for (const auto& sk : skipped)
        skiplog << sk.chain_id << ":" << sk.residue_index << ","
                << to_string(sk.amino_acid) << "," << sk.reason << "\n";
      std::printf("evaluated %d residues: avg %.1f%%\n", report.total,
                  report.avg_pct());
      return 0;
    }

    if (an->parsed()) {
      echo_config(app, common.out);
      const auto table = load_chi_table(an_chi_table);
      auto model = load_checkpoint(an_checkpoint);
      const Structure s = parse_pdb_file(an_pdb);
      const fs::path out_dir(common.out);
      const int k = model->config().k;

      if (an_scan->parsed()) {
        const auto [chain_id, index] = parse_residue_ref(an_residue);
        const ResidueRecord* residue = find_residue(s, chain_id, index);
        if (!residue)
          throw Error("residue " + an_residue + " not found");
        const ModelScorer scorer({model.get()});
        const EnergyScan scan =
            chi_scan(scorer, s, *residue, table, scan_chi - 1, scan_step,
                     scan_rotations, k, an_seed);
        std::ofstream(out_dir / "scan.csv") << scan_csv(scan);
        std::printf("scanned %zu offsets for %s chi%d\n",
                    scan.offset_deg.size(), an_residue.c_str(), scan_chi);
      } else if (an_sal->parsed()) {
        const auto [chain_id, index] = parse_residue_ref(an_residue);
        const ResidueRecord* residue = find_residue(s, chain_id, index);
        if (!residue)
          throw Error("residue " + an_residue + " not found");
        const AtomContext ctx = knn_context(s, *residue, k);
        const SaliencyMap map =
            saliency(*model, featurize(ctx, Rotation::identity()));
        std::ofstream(out_dir / "saliency.csv") << saliency_csv(ctx, map);
        std::printf("saliency over %zu atoms written\n", map.magnitude.size());
      } else {
        const auto embeddings = embed_contexts(*model, s, k);
        std::ofstream(out_dir / "embeddings.csv") << embeddings_csv(embeddings);
        std::printf("embedded %zu residues\n", embeddings.size());
      }
      return 0;
    }

    if (insp->parsed()) {
      std::fputs(describe_checkpoint(insp_path).c_str(), stdout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
