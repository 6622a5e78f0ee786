// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#include "imore/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <cstring>
#include <thread>

#include <json.hpp>

#include "imore/errors.hpp"
#include "imore/gradcheck.hpp"

namespace imore {

namespace fs = std::filesystem;

const char* to_string(AblationVariant variant) {
  switch (variant) {
    case AblationVariant::Full: return "full";
    case AblationVariant::NoFeatureSelection: return "no_feature_selection";
    case AblationVariant::MacControl: return "mac_control";
    case AblationVariant::ExplicitOracle: return "explicit_oracle";
  }
  return "?";
}

AblationVariant ablation_variant_from_string(const std::string& name) {
  if (name == "full") return AblationVariant::Full;
  if (name == "no_feature_selection") return AblationVariant::NoFeatureSelection;
  if (name == "mac_control") return AblationVariant::MacControl;
  if (name == "explicit_oracle") return AblationVariant::ExplicitOracle;
  throw ConfigError("unknown ablation variant: " + name);
}

void TrainConfig::validate() const {
  if (lr <= 0.0) throw ConfigError("lr must be > 0");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (batch_size < 1 || epochs < 1) throw ConfigError("batch_size and epochs must be >= 1");
  if (precision != "f32" && precision != "f64") throw ConfigError("precision must be f32 or f64");
  if (mode != 1 && mode != 2) throw ConfigError("mode must be 1 or 2");
  if (corruption_rate < 0.0 || corruption_rate > 1.0) {
    throw ConfigError("corruption_rate must be in [0,1]");
  }
  if (eval_workers < 1) throw ConfigError("eval_workers must be >= 1");
}

TrainConfig desk_preset() { return TrainConfig{}; }

TrainConfig paper_preset() {
  TrainConfig c;
  c.lr = 1e-6;
  c.weight_decay = 1e-4;
  c.batch_size = 4;
  c.epochs = 100;
  return c;
}

TrainConfig preset_by_name(const std::string& name) {
  if (name == "desk") return desk_preset();
  if (name == "paper") return paper_preset();
  throw ConfigError("unknown preset: " + name);
}

std::string train_config_to_json(const TrainConfig& c) {
  nlohmann::json j;
  j["lr"] = c.lr;
  j["weight_decay"] = c.weight_decay;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["precision"] = c.precision;
  j["mode"] = c.mode;
  j["corruption_rate"] = c.corruption_rate;
  j["ablation_variant"] = to_string(c.ablation_variant);
  j["eval_workers"] = c.eval_workers;
  return j.dump();
}

TrainConfig train_config_from_json(const std::string& json_text) {
  static const std::set<std::string> known = {
      "preset", "lr", "weight_decay", "batch_size", "epochs", "seed", "precision",
      "mode", "corruption_rate", "ablation_variant", "eval_workers"};
  try {
    const auto j = nlohmann::json::parse(json_text);
    for (const auto& [key, _] : j.items()) {
      if (!known.count(key)) throw ConfigError("unknown train config key: " + key);
    }
    TrainConfig c = j.contains("preset") ? preset_by_name(j.at("preset").get<std::string>())
                                         : desk_preset();
    c.lr = j.value("lr", c.lr);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.seed = j.value("seed", c.seed);
    c.precision = j.value("precision", c.precision);
    c.mode = j.value("mode", c.mode);
    c.corruption_rate = j.value("corruption_rate", c.corruption_rate);
    if (j.contains("ablation_variant")) {
      c.ablation_variant = ablation_variant_from_string(j.at("ablation_variant"));
    }
    c.eval_workers = j.value("eval_workers", c.eval_workers);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad train config json: " + std::string(e.what()));
  }
}

ProgramSource ProgramSource::parse(const std::string& text) {
  if (text == "gold") return gold();
  if (text == "predicted") return predicted();
  if (text.rfind("corrupted:", 0) == 0) {
    try {
      const double rate = std::stod(text.substr(10));
      if (rate < 0.0 || rate > 1.0) throw ConfigError("corruption rate out of [0,1]");
      return corrupted(rate);
    } catch (const std::logic_error&) {
      throw ConfigError("bad corruption rate in: " + text);
    }
  }
  throw ConfigError("unknown program source: " + text + " (gold|predicted|corrupted:RATE)");
}

std::string ProgramSource::name() const {
  switch (kind) {
    case Kind::Gold: return "gold";
    case Kind::Predicted: return "predicted";
    case Kind::Corrupted: {
      std::ostringstream out;
      out << "corrupted:" << rate;
      return out.str();
    }
  }
  return "?";
}

// --- eval report -----------------------------------------------------------------

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["overall"] = overall;
  j["total"] = total;
  j["program_source"] = program_source;
  j["split"] = split;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  for (const auto& [key, cell] : cells) {
    j["cells"][key] = {{"correct", cell.correct}, {"total", cell.total}, {"accuracy", cell.acc()}};
  }
  j["confusions"] = confusions;
  j["majority_overall"] = majority_overall;
  j["majority_per_type"] = majority_per_type;
  return j.dump(2);
}

EvalReport EvalReport::from_json(const std::string& text) {
  EvalReport r;
  try {
    const auto j = nlohmann::json::parse(text);
    r.overall = j.at("overall").get<double>();
    r.total = j.at("total").get<int>();
    r.program_source = j.value("program_source", "");
    r.split = j.value("split", "");
    r.config_hash = j.value("config_hash", "");
    r.seed = j.value("seed", 0ULL);
    if (j.contains("cells")) {
      for (const auto& [key, cell] : j.at("cells").items()) {
        r.cells[key] = CellAcc{cell.at("correct").get<int>(), cell.at("total").get<int>()};
      }
    }
    if (j.contains("confusions")) {
      r.confusions = j.at("confusions").get<std::map<std::string, std::vector<std::vector<int>>>>();
    }
    r.majority_overall = j.value("majority_overall", 0.0);
    if (j.contains("majority_per_type")) {
      r.majority_per_type = j.at("majority_per_type").get<std::map<std::string, double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad eval report json: " + std::string(e.what()));
  }
  return r;
}

namespace {

std::string fmt_cell(const std::map<std::string, CellAcc>& cells, const std::string& key) {
  auto it = cells.find(key);
  if (it == cells.end() || it->second.total == 0) return "  N/A";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.3f", it->second.acc());
  return buf;
}

}  // namespace

std::string EvalReport::to_table_text() const {
  std::ostringstream out;
  out << "split " << split << " programs " << program_source << " seed " << seed << "\n";
  out << "          Overall |   All Before  After    BTW |   All Before  After    BTW |   All "
         "Before  After    BTW\n";
  out << "                  |         query_action        |        query_direction      |        "
         "query_body_part\n";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.3f", overall);
  out << "            " << buf << " |";
  for (const char* qt : {"query_action", "query_direction", "query_body_part"}) {
    const std::string q(qt);
    out << " " << fmt_cell(cells, q + ".all") << " " << fmt_cell(cells, q + ".before") << " "
        << fmt_cell(cells, q + ".after") << " " << fmt_cell(cells, q + ".between") << " |";
  }
  out << "\n";
  std::snprintf(buf, sizeof buf, "%.3f", majority_overall);
  out << "majority    " << buf << "\n";
  return out.str();
}

// --- binding ---------------------------------------------------------------------

Tokenizer build_tokenizer(const DatasetManifest& manifest) {
  std::vector<std::string> texts;
  for (const auto& e : manifest.examples) {
    if (e.split == Split::Train) texts.push_back(e.question);
  }
  texts.push_back(question_type_phrase(QuestionType::QueryAction));
  texts.push_back(question_type_phrase(QuestionType::QueryDirection));
  texts.push_back(question_type_phrase(QuestionType::QueryBodyPart));
  return Tokenizer::build(texts);
}

ModelConfig bind_config(ModelConfig config, const DatasetManifest& manifest) {
  config.token_vocab = build_tokenizer(manifest).vocab_size();
  config.n_actions = static_cast<int>(manifest.vocab.labels(ConceptKind::Action).size());
  config.n_directions = static_cast<int>(manifest.vocab.labels(ConceptKind::Direction).size());
  config.n_body_parts = static_cast<int>(manifest.vocab.labels(ConceptKind::BodyPart).size());
  config.n_concepts = concept_count(manifest.vocab);
  return config;
}

namespace {

Variant variant_for(AblationVariant v) {
  switch (v) {
    case AblationVariant::Full: return Variant::Full;
    case AblationVariant::NoFeatureSelection: return Variant::NoFeatureSelection;
    case AblationVariant::MacControl: return Variant::MacControl;
    case AblationVariant::ExplicitOracle:
      throw ConfigError("the explicit-oracle variant is not trainable");
  }
  return Variant::Full;
}

std::string relation_cell(const Program& program) {
  const ProgramNode& body = *program.root->children[0];
  if (is_relate(body.func)) return to_string(relation_of(body.func));
  return "none";
}

std::string branch_name(QuestionType qtype) { return to_string(qtype); }

Program make_eval_program(const QAExample& ex, const ProgramSource& source,
                          const ConceptVocabulary& vocab, std::uint64_t eval_seed, bool* parsed) {
  *parsed = true;
  switch (source.kind) {
    case ProgramSource::Kind::Gold: return ex.program;
    case ProgramSource::Kind::Predicted:
      try {
        return predict_program(ex.question, vocab).program;
      } catch (const UnparsableQuestionError&) {
        *parsed = false;
        return ex.program;  // counted as wrong by the caller
      }
    case ProgramSource::Kind::Corrupted:
      return corrupt_program(ex.program, source.rate, mix_seed(eval_seed, fnv1a(ex.id)), vocab);
  }
  return ex.program;
}

struct PerExample {
  bool correct = false;
  bool valid = true;        // prediction produced a comparable answer
  int gold_idx = -1;
  int pred_idx = -1;
  QuestionType branch = QuestionType::QueryAction;
};

void fill_majority(EvalReport& report, const DatasetManifest& manifest,
                   const std::vector<const QAExample*>& split_examples) {
  // Majority answer per question type, from the train split.
  std::map<QuestionType, std::map<std::string, int>> counts;
  for (const auto& e : manifest.examples) {
    if (e.split == Split::Train) counts[e.question_type][e.answer.label] += 1;
  }
  std::map<QuestionType, std::string> majority;
  for (auto& [qtype, c] : counts) {
    std::string best;
    int best_count = -1;
    for (const auto& [label, n] : c) {
      if (n > best_count) {
        best = label;
        best_count = n;
      }
    }
    majority[qtype] = best;
  }
  int correct = 0;
  std::map<QuestionType, CellAcc> per_type;
  for (const auto* e : split_examples) {
    auto it = majority.find(e->question_type);
    const bool hit = it != majority.end() && it->second == e->answer.label;
    correct += hit;
    per_type[e->question_type].total += 1;
    per_type[e->question_type].correct += hit;
  }
  report.majority_overall =
      split_examples.empty() ? 0.0 : static_cast<double>(correct) / split_examples.size();
  for (const auto& [qtype, cell] : per_type) {
    report.majority_per_type[branch_name(qtype)] = cell.acc();
  }
}

void finalize_report(EvalReport& report, const std::vector<const QAExample*>& examples,
                     const std::vector<PerExample>& results, const ConceptVocabulary& vocab) {
  for (QuestionType qtype : {QuestionType::QueryAction, QuestionType::QueryDirection,
                             QuestionType::QueryBodyPart}) {
    const int n = static_cast<int>(vocab.labels(answer_kind(qtype)).size());
    report.confusions[branch_name(qtype)] =
        std::vector<std::vector<int>>(n, std::vector<int>(n, 0));
  }
  int correct = 0;
  for (size_t i = 0; i < examples.size(); ++i) {
    const QAExample& ex = *examples[i];
    const PerExample& r = results[i];
    correct += r.correct;
    const std::string qt = branch_name(ex.question_type);
    report.cells[qt + ".all"].total += 1;
    report.cells[qt + ".all"].correct += r.correct;
    const std::string rel = relation_cell(ex.program);
    report.cells[qt + "." + rel].total += 1;
    report.cells[qt + "." + rel].correct += r.correct;
    if (r.valid && r.branch == ex.question_type && r.gold_idx >= 0 && r.pred_idx >= 0) {
      report.confusions[qt][r.gold_idx][r.pred_idx] += 1;
    }
  }
  report.total = static_cast<int>(examples.size());
  report.overall = examples.empty() ? 0.0 : static_cast<double>(correct) / examples.size();
}

}  // namespace

// --- evaluation --------------------------------------------------------------------

template <class T>
EvalReport evaluate_model(const ImoreModel<T>& model, const Featurizer& featurizer,
                          const DatasetManifest& manifest,
                          const std::map<std::string, MotionSequence>& motions, Split split,
                          int mode, const ProgramSource& source, std::uint64_t eval_seed,
                          int workers) {
  const auto examples = manifest.split_examples(split);
  std::vector<PerExample> results(examples.size());
  const ConceptVocabulary& vocab = featurizer.vocab();

  auto run_range = [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      const QAExample& ex = *examples[i];
      auto mit = motions.find(ex.motion_id);
      if (mit == motions.end()) throw MissingMotionError("missing motion: " + ex.motion_id);
      bool parsed = true;
      Program program = make_eval_program(ex, source, vocab, eval_seed, &parsed);
      InferenceOut<T> out;
      if (mode == 1) {
        out = infer_mode1(model, featurizer, mit->second, ex.question, program);
      } else {
        out = infer_mode2(model, featurizer, mit->second, ex.question, program,
                          model.config().mode2_runs, mix_seed(eval_seed ^ 0x5eedULL, fnv1a(ex.id)));
      }
      PerExample r;
      r.branch = out.branch;
      int best = 0;
      for (int c = 1; c < out.logits.cols(); ++c) {
        if (out.logits(0, c) > out.logits(0, best)) best = c;
      }
      r.pred_idx = best;
      const auto& branch_labels = vocab.labels(answer_kind(out.branch));
      const std::string pred_label = branch_labels.at(best);
      r.valid = parsed;
      r.correct = parsed && out.branch == ex.question_type && pred_label == ex.answer.label;
      if (out.branch == ex.question_type) {
        r.gold_idx = vocab.index_of(ex.answer.kind, ex.answer.label);
      }
      results[i] = r;
    }
  };

  if (workers <= 1 || examples.size() < 2) {
    run_range(0, examples.size());
  } else {
    const size_t n_threads = std::min<size_t>(workers, examples.size());
    std::vector<std::thread> pool;
    const size_t chunk = (examples.size() + n_threads - 1) / n_threads;
    for (size_t w = 0; w < n_threads; ++w) {
      const size_t lo = w * chunk;
      const size_t hi = std::min(examples.size(), lo + chunk);
      if (lo < hi) pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  EvalReport report;
  report.split = to_string(split);
  report.program_source = source.name();
  report.seed = eval_seed;
  finalize_report(report, examples, results, vocab);
  fill_majority(report, manifest, examples);
  return report;
}

EvalReport explicit_baseline(const DatasetManifest& manifest,
                             const std::map<std::string, MotionSequence>& motions, Split split,
                             const ProgramSource& source, std::uint64_t eval_seed) {
  const auto examples = manifest.split_examples(split);
  std::vector<PerExample> results(examples.size());
  for (size_t i = 0; i < examples.size(); ++i) {
    const QAExample& ex = *examples[i];
    auto mit = motions.find(ex.motion_id);
    if (mit == motions.end()) throw MissingMotionError("missing motion: " + ex.motion_id);
    bool parsed = true;
    Program program = make_eval_program(ex, source, manifest.vocab, eval_seed, &parsed);
    ExecResult r = execute(mit->second, program);
    PerExample p;
    p.branch = program.question_type;
    p.valid = parsed && r.ok() && r.answer->kind == ex.answer.kind;
    p.correct = parsed && r.ok() && r.answer == ex.answer;
    if (p.valid) {
      p.gold_idx = manifest.vocab.index_of(ex.answer.kind, ex.answer.label);
      p.pred_idx = manifest.vocab.index_of(r.answer->kind, r.answer->label);
    }
    results[i] = p;
  }
  EvalReport report;
  report.split = to_string(split);
  report.program_source = source.name();
  report.seed = eval_seed;
  finalize_report(report, examples, results, manifest.vocab);
  fill_majority(report, manifest, examples);
  return report;
}

// --- training --------------------------------------------------------------------

template <class T>
Trained<T> train_model(const DatasetManifest& manifest,
                       const std::map<std::string, MotionSequence>& motions, ModelConfig mconfig,
                       const TrainConfig& tconfig) {
  tconfig.validate();
  mconfig.variant = variant_for(tconfig.ablation_variant);
  mconfig = bind_config(mconfig, manifest);
  Tokenizer tokenizer = build_tokenizer(manifest);
  Featurizer featurizer(mconfig, tokenizer, manifest.vocab);
  ImoreModel<T> model(mconfig, tconfig.seed);

  std::vector<const QAExample*> train = manifest.split_examples(Split::Train);
  if (train.empty()) throw ConfigError("manifest has an empty train split");

  AdamWConfig opt_config;
  opt_config.lr = tconfig.lr;
  opt_config.weight_decay = tconfig.weight_decay;
  AdamW<T> optimizer(opt_config);
  Rng rng(mix_seed(tconfig.seed, 0x7261696eULL));  // train stream

  TrainStats stats;
  std::vector<Mat<T>> best_values;
  const bool have_val = !manifest.split_examples(Split::Val).empty();

  for (int epoch = 0; epoch < tconfig.epochs; ++epoch) {
    // seeded shuffle
    std::vector<const QAExample*> order = train;
    for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double epoch_loss = 0.0;
    GradBuffer<T> grads(model.params());
    for (size_t idx = 0; idx < order.size(); ++idx) {
      const QAExample& ex = *order[idx];
      auto mit = motions.find(ex.motion_id);
      if (mit == motions.end()) throw MissingMotionError("missing motion: " + ex.motion_id);
      const MotionSequence& motion = mit->second;

      Program program = ex.program;
      if (tconfig.corruption_rate > 0.0) {
        program = corrupt_program(ex.program, tconfig.corruption_rate, rng.next_u64(),
                                  manifest.vocab);
      }
      std::vector<int> starts;
      if (tconfig.mode == 1) {
        starts = featurizer.mode1_starts(motion.frame_count());
      } else {
        starts = {static_cast<int>(rng.below(
            static_cast<std::uint64_t>(featurizer.start_range(motion.frame_count()))))};
      }

      Tape<T> tape;
      ForwardCtx<T> ctx{tape, model.params(), &rng, static_cast<T>(mconfig.dropout)};
      ModelInput<T> input = featurizer.make_input<T>(motion, ex.question, program, starts);
      ForwardOut<T> out = model.forward(ctx, input);
      const int target = manifest.vocab.index_of(ex.answer.kind, ex.answer.label);
      Var<T> loss = cross_entropy(out.logits, target);
      const double loss_value = static_cast<double>(tape.val(loss)(0, 0));
      if (!std::isfinite(loss_value)) {
        std::ostringstream diag;
        diag << "non-finite loss at epoch " << epoch << " example " << ex.id << "; param norms:";
        for (int pi = 0; pi < model.params().size(); ++pi) {
          diag << " " << model.params().at(pi).name << "="
               << static_cast<double>(model.params().at(pi).value.norm());
        }
        throw DivergenceError(diag.str());
      }
      epoch_loss += loss_value;
      tape.backward(loss);
      grads.accumulate(tape, ctx);

      if (grads.count() == tconfig.batch_size || idx + 1 == order.size()) {
        optimizer.step(model.params(), grads.mean());
        grads.reset();
      }
    }

    EpochStat stat;
    stat.epoch = epoch;
    stat.train_loss = epoch_loss / static_cast<double>(order.size());
    if (have_val) {
      EvalReport val = evaluate_model(model, featurizer, manifest, motions, Split::Val,
                                      tconfig.mode, ProgramSource::gold(),
                                      mix_seed(tconfig.seed, 0x76616cULL), tconfig.eval_workers);
      stat.val_accuracy = val.overall;
      if (stat.val_accuracy > stats.best_val_accuracy || stats.best_epoch < 0) {
        stats.best_val_accuracy = stat.val_accuracy;
        stats.best_epoch = epoch;
        best_values.clear();
        for (int pi = 0; pi < model.params().size(); ++pi) {
          best_values.push_back(model.params().at(pi).value);
        }
      }
    }
    stats.curve.push_back(stat);
  }

  if (have_val && !best_values.empty()) {
    for (int pi = 0; pi < model.params().size(); ++pi) {
      model.params().at(pi).value = best_values[pi];
    }
  }
  return Trained<T>{std::move(model), std::move(featurizer), std::move(stats)};
}

// --- ablation --------------------------------------------------------------------

double AblationTable::median(AblationVariant variant) const {
  for (const auto& row : rows) {
    if (row.variant == variant) return row.median_accuracy;
  }
  throw ConfigError("variant missing from ablation table");
}

std::string AblationTable::to_text() const {
  std::ostringstream out;
  out << "variant                 median  per-seed\n";
  for (const auto& row : rows) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.3f", row.median_accuracy);
    out << to_string(row.variant);
    for (size_t i = std::strlen(to_string(row.variant)); i < 24; ++i) out << ' ';
    out << buf << " ";
    for (double a : row.per_seed_accuracy) {
      std::snprintf(buf, sizeof buf, " %.3f", a);
      out << buf;
    }
    out << "  (params " << row.param_count << ")\n";
  }
  out << "reference: no_feature_selection " << kReferenceNoSelection << " -> full "
      << kReferenceFull << "\n";
  return out.str();
}

std::string AblationTable::to_json() const {
  nlohmann::json j;
  for (const auto& row : rows) {
    nlohmann::json r;
    r["variant"] = to_string(row.variant);
    r["median_accuracy"] = row.median_accuracy;
    r["per_seed_accuracy"] = row.per_seed_accuracy;
    r["param_count"] = row.param_count;
    j["rows"].push_back(std::move(r));
  }
  j["reference"] = {{"no_feature_selection", kReferenceNoSelection}, {"full", kReferenceFull}};
  return j.dump(2);
}

namespace {
double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
}  // namespace

AblationTable run_ablation(const DatasetManifest& manifest,
                           const std::map<std::string, MotionSequence>& motions,
                           const ModelConfig& mconfig, const TrainConfig& tconfig,
                           const std::vector<std::uint64_t>& seeds, int eval_mode) {
  if (seeds.size() < 3) throw ConfigError("run_ablation needs at least 3 seeds");
  AblationTable table;
  for (AblationVariant variant : {AblationVariant::MacControl,
                                  AblationVariant::NoFeatureSelection, AblationVariant::Full}) {
    AblationRow row;
    row.variant = variant;
    for (std::uint64_t seed : seeds) {
      TrainConfig tc = tconfig;
      tc.seed = seed;
      tc.ablation_variant = variant;
      Trained<float> trained = train_model<float>(manifest, motions, mconfig, tc);
      EvalReport report =
          evaluate_model(trained.model, trained.featurizer, manifest, motions, Split::Test,
                         eval_mode, ProgramSource::gold(), seed, tconfig.eval_workers);
      row.per_seed_accuracy.push_back(report.overall);
      row.param_count = trained.model.params().scalar_count();
    }
    row.median_accuracy = median_of(row.per_seed_accuracy);
    table.rows.push_back(std::move(row));
  }
  // Explicit execution over gold annotations for context (upper bound).
  AblationRow oracle_row;
  oracle_row.variant = AblationVariant::ExplicitOracle;
  EvalReport oracle =
      explicit_baseline(manifest, motions, Split::Test, ProgramSource::gold(), seeds[0]);
  for (size_t i = 0; i < seeds.size(); ++i) oracle_row.per_seed_accuracy.push_back(oracle.overall);
  oracle_row.median_accuracy = oracle.overall;
  table.rows.push_back(std::move(oracle_row));
  return table;
}

// --- checkpoints -------------------------------------------------------------------

template <class T>
void save_model_checkpoint(const std::string& path, const ImoreModel<T>& model,
                           const Featurizer& featurizer, const std::string& config_hash,
                           std::uint64_t seed) {
  nlohmann::json meta;
  meta["format"] = "imore-model";
  meta["model"] = nlohmann::json::parse(model_config_to_json(model.config()));
  meta["tokenizer"] = featurizer.tokenizer().vocab();
  meta["vocab"] = {{"actions", featurizer.vocab().labels(ConceptKind::Action)},
                   {"directions", featurizer.vocab().labels(ConceptKind::Direction)},
                   {"body_parts", featurizer.vocab().labels(ConceptKind::BodyPart)}};
  meta["config_hash"] = config_hash;
  meta["seed"] = seed;
  Checkpoint ck = registry_to_checkpoint(model.params(), meta.dump());
  save_checkpoint(path, ck);
}

LoadedModel load_model_checkpoint(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(ck.meta_json);
    if (meta.at("format") != "imore-model") throw FormatError("not a model checkpoint");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad checkpoint meta: " + std::string(e.what()));
  }
  ModelConfig config = model_config_from_json(meta.at("model").dump());
  Tokenizer tokenizer = Tokenizer::from_vocab(meta.at("tokenizer").get<std::vector<std::string>>());
  ConceptVocabulary vocab;
  vocab.add_all(ConceptKind::Action, meta.at("vocab").at("actions").get<std::vector<std::string>>());
  vocab.add_all(ConceptKind::Direction,
                meta.at("vocab").at("directions").get<std::vector<std::string>>());
  vocab.add_all(ConceptKind::BodyPart,
                meta.at("vocab").at("body_parts").get<std::vector<std::string>>());
  const std::uint64_t seed = meta.value("seed", 0ULL);

  LoadedModel loaded{ImoreModel<float>(config, seed),
                    Featurizer(config, tokenizer, vocab),
                    meta.value("config_hash", ""), seed};
  checkpoint_into_registry(ck, loaded.model.params());
  return loaded;
}

// --- dataset directory ---------------------------------------------------------------

void save_dataset_dir(const std::string& dir, const DatasetManifest& manifest,
                      const std::vector<MotionSequence>& motions) {
  fs::create_directories(fs::path(dir) / "motions");
  save_manifest((fs::path(dir) / "dataset.jsonl").string(), manifest);
  for (const auto& m : motions) {
    write_motion((fs::path(dir) / "motions" / (m.id + ".imom")).string(), m);
  }
}

LoadedDataset load_dataset_dir(const std::string& dir) {
  LoadedDataset out;
  out.manifest = load_manifest((fs::path(dir) / "dataset.jsonl").string());
  for (const auto& e : out.manifest.examples) {
    if (out.motions.count(e.motion_id)) continue;
    const std::string path = (fs::path(dir) / "motions" / (e.motion_id + ".imom")).string();
    if (!fs::exists(path)) throw MissingMotionError("missing motion file: " + path);
    out.motions.emplace(e.motion_id, read_motion(path));
  }
  return out;
}

std::string loss_curve_csv(const TrainStats& stats) {
  std::ostringstream out;
  out << "epoch,train_loss,val_accuracy\n";
  for (const auto& s : stats.curve) {
    out << s.epoch << ',' << s.train_loss << ',' << s.val_accuracy << "\n";
  }
  return out.str();
}

// explicit instantiations
template Trained<float> train_model<float>(const DatasetManifest&,
                                           const std::map<std::string, MotionSequence>&,
                                           ModelConfig, const TrainConfig&);
template Trained<double> train_model<double>(const DatasetManifest&,
                                             const std::map<std::string, MotionSequence>&,
                                             ModelConfig, const TrainConfig&);
template EvalReport evaluate_model<float>(const ImoreModel<float>&, const Featurizer&,
                                          const DatasetManifest&,
                                          const std::map<std::string, MotionSequence>&, Split,
                                          int, const ProgramSource&, std::uint64_t, int);
template EvalReport evaluate_model<double>(const ImoreModel<double>&, const Featurizer&,
                                           const DatasetManifest&,
                                           const std::map<std::string, MotionSequence>&, Split,
                                           int, const ProgramSource&, std::uint64_t, int);
template void save_model_checkpoint<float>(const std::string&, const ImoreModel<float>&,
                                           const Featurizer&, const std::string&, std::uint64_t);
template void save_model_checkpoint<double>(const std::string&, const ImoreModel<double>&,
                                            const Featurizer&, const std::string&, std::uint64_t);

}  // namespace imore
