// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef IMORE_TRAIN_HPP
#define IMORE_TRAIN_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

#include "imore/checkpoint.hpp"
#include "imore/dataset.hpp"
#include "imore/model.hpp"

namespace imore {

enum class AblationVariant { Full, NoFeatureSelection, MacControl, ExplicitOracle };
const char* to_string(AblationVariant variant);
AblationVariant ablation_variant_from_string(const std::string& name);

struct TrainConfig {
  double lr = 3e-4;
  double weight_decay = 1e-4;
  int batch_size = 16;
  int epochs = 60;
  std::uint64_t seed = 0;
  std::string precision = "f32";  // "f32" (training) or "f64" (verification)
  int mode = 2;                   // window strategy: 1 = full cover, 2 = sampled
  double corruption_rate = 0.0;   // train-time program corruption
  AblationVariant ablation_variant = AblationVariant::Full;
  int eval_workers = 1;

  void validate() const;
};

/// The paper-reported optimization preset (pretrained-backbone scale); the
/// defaults above are the desk-scale preset for training from scratch.
TrainConfig paper_preset();
TrainConfig desk_preset();
TrainConfig preset_by_name(const std::string& name);

std::string train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const std::string& json_text);

struct ProgramSource {
  enum class Kind { Gold, Predicted, Corrupted } kind = Kind::Gold;
  double rate = 0.0;  // corruption rate

  static ProgramSource gold() { return {}; }
  static ProgramSource predicted() { return {Kind::Predicted, 0.0}; }
  static ProgramSource corrupted(double rate) { return {Kind::Corrupted, rate}; }
  /// "gold" | "predicted" | "corrupted:RATE"
  static ProgramSource parse(const std::string& text);
  std::string name() const;
};

struct CellAcc {
  int correct = 0;
  int total = 0;
  double acc() const { return total > 0 ? static_cast<double>(correct) / total : 0.0; }
};

struct EvalReport {
  double overall = 0.0;
  int total = 0;
  // keys: "<qtype>.all" / "<qtype>.none|before|after|between"
  std::map<std::string, CellAcc> cells;
  // per branch: confusion[gold][pred] over the branch vocabulary
  std::map<std::string, std::vector<std::vector<int>>> confusions;
  double majority_overall = 0.0;
  std::map<std::string, double> majority_per_type;
  std::string program_source;
  std::string split;
  std::string config_hash;
  std::uint64_t seed = 0;

  std::string to_json() const;
  /// Flat grid in the Overall | per-type {All, Before, After, BTW} layout;
  /// empty cells print as N/A.
  std::string to_table_text() const;
  static EvalReport from_json(const std::string& text);
};

struct EpochStat {
  int epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainStats {
  std::vector<EpochStat> curve;
  double best_val_accuracy = 0.0;
  int best_epoch = -1;
};

template <class T>
struct Trained {
  ImoreModel<T> model;
  Featurizer featurizer;
  TrainStats stats;
};

/// Builds the question tokenizer from the train split plus the question-type
/// phrases, and binds vocabulary sizes into the model config.
Tokenizer build_tokenizer(const DatasetManifest& manifest);
ModelConfig bind_config(ModelConfig config, const DatasetManifest& manifest);

template <class T>
Trained<T> train_model(const DatasetManifest& manifest,
                       const std::map<std::string, MotionSequence>& motions, ModelConfig mconfig,
                       const TrainConfig& tconfig);

template <class T>
EvalReport evaluate_model(const ImoreModel<T>& model, const Featurizer& featurizer,
                          const DatasetManifest& manifest,
                          const std::map<std::string, MotionSequence>& motions, Split split,
                          int mode, const ProgramSource& source, std::uint64_t eval_seed = 0,
                          int workers = 1);

/// NSPose-style explicit baseline: symbolic execution over gold annotations.
EvalReport explicit_baseline(const DatasetManifest& manifest,
                             const std::map<std::string, MotionSequence>& motions, Split split,
                             const ProgramSource& source, std::uint64_t eval_seed = 0);

struct AblationRow {
  AblationVariant variant;
  std::vector<double> per_seed_accuracy;
  double median_accuracy = 0.0;
  long long param_count = 0;
};

struct AblationTable {
  std::vector<AblationRow> rows;
  // published reference point for the C -> D comparison
  static constexpr double kReferenceNoSelection = 0.607;
  static constexpr double kReferenceFull = 0.640;

  std::string to_text() const;
  std::string to_json() const;
  double median(AblationVariant variant) const;
};

AblationTable run_ablation(const DatasetManifest& manifest,
                           const std::map<std::string, MotionSequence>& motions,
                           const ModelConfig& mconfig, const TrainConfig& tconfig,
                           const std::vector<std::uint64_t>& seeds, int eval_mode = 1);

// --- model checkpoints ---------------------------------------------------------

template <class T>
void save_model_checkpoint(const std::string& path, const ImoreModel<T>& model,
                           const Featurizer& featurizer, const std::string& config_hash,
                           std::uint64_t seed);

struct LoadedModel {
  ImoreModel<float> model;
  Featurizer featurizer;
  std::string config_hash;
  std::uint64_t seed = 0;
};

LoadedModel load_model_checkpoint(const std::string& path);

// --- dataset directory ----------------------------------------------------------

struct LoadedDataset {
  DatasetManifest manifest;
  std::map<std::string, MotionSequence> motions;
};

/// Layout: <dir>/dataset.jsonl plus <dir>/motions/<id>.imom (+ .json sidecar).
void save_dataset_dir(const std::string& dir, const DatasetManifest& manifest,
                      const std::vector<MotionSequence>& motions);
LoadedDataset load_dataset_dir(const std::string& dir);

std::string loss_curve_csv(const TrainStats& stats);

}  // namespace imore

#endif
