// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef IMORE_DATASET_HPP
#define IMORE_DATASET_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "imore/motion.hpp"
#include "imore/oracle.hpp"
#include "imore/program.hpp"

namespace imore {

enum class Split { Train, Val, Test };
const char* to_string(Split split);
Split split_from_string(const std::string& name);

/// Split assignment is a pure function of the motion id, so motions never
/// leak across splits.
struct SplitRatios {
  double train = 0.70;
  double val = 0.15;  // test gets the rest
};
Split split_of_motion(const std::string& motion_id, const SplitRatios& ratios);

struct QAExample {
  std::string id;
  std::string motion_id;
  std::string question;
  QuestionType question_type = QuestionType::QueryAction;
  Program program;
  Concept answer;
  Split split = Split::Train;
};

struct CellKey {
  QuestionType question_type;
  std::optional<Relation> relation;  // nullopt = no relate step

  std::string name() const;
  auto operator<=>(const CellKey&) const = default;
};

struct DatasetManifest {
  std::vector<QAExample> examples;
  ConceptVocabulary vocab;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::map<std::string, int> cell_counts;

  std::vector<const QAExample*> split_examples(Split split) const;
};

struct DatasetConfig {
  int per_cell_quota = 12;
  std::vector<std::optional<Relation>> relations{std::nullopt, Relation::Before, Relation::After,
                                                 Relation::Between};
  std::map<std::string, int> cell_overrides;  // cell name -> quota (0 disables a cell)
  SplitRatios ratios;
  bool allow_underfull = false;
};

/// Emits only questions whose program execution yields a unique answer;
/// everything else is discarded. Throws QuotaUnreachableError when a cell
/// cannot be filled (unless allow_underfull).
DatasetManifest generate_dataset(const std::vector<MotionSequence>& motions,
                                 std::uint64_t rng_seed, const DatasetConfig& config,
                                 const ConceptVocabulary& vocab);

/// Surface forms used by the question templates ("squat"/"squatting",
/// "move left"/"moving left").
struct SurfaceForms {
  std::string base;
  std::string gerund;
};
SurfaceForms surface_forms(const Concept& concept_arg);

constexpr int kTemplateVariants = 2;

/// Deterministic template fill; `variant` selects among the surface templates
/// for a cell (the generator picks it by hash for lexical variety).
std::string render_question(QuestionType qtype, std::optional<Relation> relation,
                            const std::vector<Concept>& anchors, int variant = 0);

struct PredictedProgram {
  Program program;
  bool exact = true;  // false when recovered via the nearest-template fallback
};

/// Inverts the question templates; exact inverse on generated text. Throws
/// UnparsableQuestionError when no template (even relaxed) applies.
PredictedProgram predict_program(const std::string& question, const ConceptVocabulary& vocab);

/// Independently perturbs each filter/relate step with probability `rate`:
/// filter concepts resample within their kind, before/after flip, between
/// swaps its arguments. Query steps are structural and never touched.
Program corrupt_program(const Program& program, double rate, std::uint64_t rng_seed,
                        const ConceptVocabulary& vocab);

// --- manifest files ---------------------------------------------------------

/// Native dataset file: a meta line then one JSON record per example.
void save_manifest(const std::string& path, const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::string& path);

struct ImportReport {
  int imported = 0;
  std::vector<std::pair<int, std::string>> skipped;  // (line, reason)
};

/// Babel-QA-style records {motion_ref, question, program_text, answer,
/// split}; invalid records are skipped and reported.
DatasetManifest import_external(const std::string& path, const ConceptVocabulary& vocab,
                                ImportReport* report = nullptr);
void export_external(const std::string& path, const DatasetManifest& manifest);

/// Re-checks every example against the symbolic oracle; returns mismatching
/// example ids (empty = consistent).
std::vector<std::string> verify_manifest(const DatasetManifest& manifest,
                                         const std::map<std::string, MotionSequence>& motions);

}  // namespace imore

#endif
