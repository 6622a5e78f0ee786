// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef IMORE_MODEL_HPP
#define IMORE_MODEL_HPP

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "imore/autograd.hpp"
#include "imore/motion.hpp"
#include "imore/params.hpp"
#include "imore/program.hpp"
#include "imore/text.hpp"

namespace imore {

enum class Variant { Full, NoFeatureSelection, MacControl };
const char* to_string(Variant variant);
Variant variant_from_string(const std::string& name);

struct ModelConfig {
  int window = 64;         // frames per encoder window
  int temporal_patch = 8;  // frames per token
  int d = 64;
  int enc_blocks = 4;
  int enc_heads = 1;
  int ffn_mult = 2;
  std::vector<int> pool_levels{0, 1, 2, 3};  // encoder block outputs in the pool
  bool pool_final = true;                    // fused final output as extra level
  int text_blocks = 1;
  int max_text_len = 32;
  int max_steps = 8;  // control queries for the MacControl variant
  double dropout = 0.1;
  Variant variant = Variant::Full;
  int mode2_runs = 5;
  bool mode2_select_prob = false;  // rank runs by softmax prob instead of raw logit

  // bound to a dataset
  int token_vocab = 0;
  int n_actions = 0;
  int n_directions = 0;
  int n_body_parts = 0;
  int n_concepts = 0;  // flat concept table size (without the null slot)

  void validate() const;
  int n_tpatch() const { return window / temporal_patch; }
  int tokens_per_window() const;
  /// Pool level ids actually used ("collapsed" variants read one level).
  std::vector<int> effective_levels() const;
  int level_count() const;
  int branch_size(QuestionType qtype) const;
};

std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& json_text);

/// Featurized example, template-typed to the compute precision.
template <class T>
struct ModelInput {
  std::vector<std::vector<Mat<T>>> windows;  // [window][patch group]
  std::vector<std::pair<int, int>> token_frame_spans;  // one per pool position
  std::vector<int> question_tokens;
  std::vector<int> qtype_tokens;
  QuestionType question_type = QuestionType::QueryAction;
  std::vector<ProgramStep> steps;
  std::vector<int> step_func_ids;
  std::vector<int> step_concept_ids;
};

template <class T>
struct StepAttn {
  Func func;
  std::optional<Concept> concept_arg;
  std::vector<int> dep_indices;    // program-step indices attended to (empty = S0)
  Mat<T> dep_weights;              // 1 x max(|deps|,1)
  Mat<T> pool_weights;             // 1 x (levels * positions)
  std::vector<T> level_marginal;   // attention mass per level
};

template <class T>
struct ModelTrace {
  Mat<T> fusion_text_weights;   // positions x question tokens
  Mat<T> fusion_qtype_weights;  // positions x qtype tokens
  std::vector<StepAttn<T>> steps;
  int positions = 0;  // per level
  int levels = 0;
};

template <class T>
struct ForwardOut {
  Var<T> logits;
  QuestionType branch = QuestionType::QueryAction;
  ModelTrace<T> trace;
  // test hooks: pre-residual attention outputs of the two fusion stages
  Var<T> fusion_text_pre;
  Var<T> fusion_qtype_pre;
};

/// Bundles a motion window plan into per-group token matrices plus text ids.
class Featurizer {
 public:
  Featurizer(ModelConfig config, Tokenizer tokenizer, ConceptVocabulary vocab)
      : config_(std::move(config)), tokenizer_(std::move(tokenizer)), vocab_(std::move(vocab)) {}

  const ModelConfig& config() const { return config_; }
  const Tokenizer& tokenizer() const { return tokenizer_; }
  const ConceptVocabulary& vocab() const { return vocab_; }

  /// Consecutive windows covering the sequence, last window right-aligned.
  std::vector<int> mode1_starts(int frame_count) const;
  /// Number of valid window starts (after loop-padding short sequences).
  int start_range(int frame_count) const;

  template <class T>
  ModelInput<T> make_input(const MotionSequence& motion, const std::string& question,
                           const Program& program, const std::vector<int>& window_starts) const;

 private:
  ModelConfig config_;
  Tokenizer tokenizer_;
  ConceptVocabulary vocab_;
};

template <class T>
class ImoreModel {
 public:
  ImoreModel(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParamRegistry<T>& params() { return params_; }
  const ParamRegistry<T>& params() const { return params_; }

  ForwardOut<T> forward(ForwardCtx<T>& ctx, const ModelInput<T>& input) const;

  /// Head parameter names for one branch (branch-exclusivity checks).
  std::vector<std::string> head_param_names(QuestionType qtype) const;

 private:
  struct AttnBlockOut {
    Var<T> out;
    Var<T> weights;
    Var<T> pre_residual;
  };

  AttnBlockOut attn_block(ForwardCtx<T>& ctx, const std::string& prefix, Var<T> q_in,
                          Var<T> kv_in) const;
  Var<T> encoder_block(ForwardCtx<T>& ctx, const std::string& prefix, Var<T> x) const;
  Var<T> encode_text(ForwardCtx<T>& ctx, const std::vector<int>& token_ids) const;
  std::pair<std::vector<Var<T>>, Var<T>> encode_window(ForwardCtx<T>& ctx,
                                                       const std::vector<Mat<T>>& groups) const;

  ModelConfig config_;
  ParamRegistry<T> params_;
};

template <class T>
struct InferenceOut {
  Mat<T> logits;  // 1 x branch size
  QuestionType branch = QuestionType::QueryAction;
  ModelTrace<T> trace;
  std::vector<std::pair<int, int>> token_frame_spans;
  int selected_start = 0;
};

/// Mode I: all consecutive windows are encoded and pooled jointly.
template <class T>
InferenceOut<T> infer_mode1(const ImoreModel<T>& model, const Featurizer& featurizer,
                            const MotionSequence& motion, const std::string& question,
                            const Program& program);

/// Mode II: `runs` random windows; keeps the run with the highest logit
/// score (raw logit by default, softmax prob behind the config flag).
template <class T>
InferenceOut<T> infer_mode2(const ImoreModel<T>& model, const Featurizer& featurizer,
                            const MotionSequence& motion, const std::string& question,
                            const Program& program, int runs, std::uint64_t seed);

// ---------------------------------------------------------------------------
// implementation
// ---------------------------------------------------------------------------

template <class T>
ImoreModel<T>::ImoreModel(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(seed);
  const auto& groups = patch_groups();
  const int d = config_.d;

  for (size_t g = 0; g < groups.size(); ++g) {
    const int in_dim = config_.temporal_patch * static_cast<int>(groups[g].joints.size()) * 3;
    params_.add("enc.patch" + std::to_string(g) + ".W", in_dim, d, Init::XavierUniform, true, rng);
    params_.add("enc.patch" + std::to_string(g) + ".b", 1, d, Init::Zero, false, rng);
  }
  params_.add("enc.pos", config_.n_tpatch(), d, Init::Normal02, true, rng);
  params_.add("enc.group", static_cast<int>(groups.size()), d, Init::Normal02, true, rng);

  auto add_block = [&](const std::string& prefix) {
    params_.add(prefix + ".attn.wq", d, d, Init::XavierUniform, true, rng);
    params_.add(prefix + ".attn.wk", d, d, Init::XavierUniform, true, rng);
    params_.add(prefix + ".attn.wv", d, d, Init::XavierUniform, true, rng);
    params_.add(prefix + ".attn.wo", d, d, Init::XavierUniform, true, rng);
    params_.add(prefix + ".attn.ln.g", 1, d, Init::One, false, rng);
    params_.add(prefix + ".attn.ln.b", 1, d, Init::Zero, false, rng);
    params_.add(prefix + ".ffn.w1", d, config_.ffn_mult * d, Init::XavierUniform, true, rng);
    params_.add(prefix + ".ffn.b1", 1, config_.ffn_mult * d, Init::Zero, false, rng);
    params_.add(prefix + ".ffn.w2", config_.ffn_mult * d, d, Init::XavierUniform, true, rng);
    params_.add(prefix + ".ffn.b2", 1, d, Init::Zero, false, rng);
    params_.add(prefix + ".ffn.ln.g", 1, d, Init::One, false, rng);
    params_.add(prefix + ".ffn.ln.b", 1, d, Init::Zero, false, rng);
  };
  for (int i = 0; i < config_.enc_blocks; ++i) add_block("enc.b" + std::to_string(i));
  params_.add("enc.final_ln.g", 1, d, Init::One, false, rng);
  params_.add("enc.final_ln.b", 1, d, Init::Zero, false, rng);

  params_.add("txt.tok", config_.token_vocab, d, Init::Normal02, true, rng);
  params_.add("txt.pos", config_.max_text_len, d, Init::Normal02, true, rng);
  for (int i = 0; i < config_.text_blocks; ++i) add_block("txt.b" + std::to_string(i));

  auto add_attn = [&](const std::string& prefix) {
    params_.add(prefix + ".wq", d, d, Init::XavierUniform, true, rng);
    params_.add(prefix + ".wk", d, d, Init::XavierUniform, true, rng);
    params_.add(prefix + ".wv", d, d, Init::XavierUniform, true, rng);
    params_.add(prefix + ".ln.g", 1, d, Init::One, false, rng);
    params_.add(prefix + ".ln.b", 1, d, Init::Zero, false, rng);
  };
  add_attn("fuse.text");
  add_attn("fuse.qtype");

  const auto levels = config_.effective_levels();
  for (size_t k = 0; k < levels.size(); ++k) {
    params_.add("pool.proj" + std::to_string(k) + ".W", d, d, Init::XavierUniform, true, rng);
  }
  if (config_.pool_final || levels.empty()) {
    params_.add("pool.projF.W", d, d, Init::XavierUniform, true, rng);
  }
  params_.add("pool.tag", config_.level_count(), d, Init::Normal02, true, rng);

  if (config_.variant == Variant::MacControl) {
    params_.add("ctrl.query", config_.max_steps, d, Init::Normal02, true, rng);
    add_attn("ctrl");
  } else {
    params_.add("prog.func", kFuncCount, d, Init::Normal02, true, rng);
    params_.add("prog.concept", config_.n_concepts + 1, d, Init::Normal02, true, rng);
    params_.add("prog.cproj.W", d, d, Init::XavierUniform, true, rng);
    params_.add("prog.ln.g", 1, d, Init::One, false, rng);
    params_.add("prog.ln.b", 1, d, Init::Zero, false, rng);
  }

  params_.add("mem.s0", 1, d, Init::Normal02, false, rng);
  add_attn("mem.dep");
  add_attn("mem.read");

  auto add_head = [&](const std::string& name, int out) {
    params_.add("head." + name + ".w1", d, d, Init::XavierUniform, true, rng);
    params_.add("head." + name + ".b1", 1, d, Init::Zero, false, rng);
    params_.add("head." + name + ".w2", d, out, Init::XavierUniform, true, rng);
    params_.add("head." + name + ".b2", 1, out, Init::Zero, false, rng);
  };
  add_head("action", config_.n_actions);
  add_head("direction", config_.n_directions);
  add_head("body_part", config_.n_body_parts);
}

template <class T>
std::vector<std::string> ImoreModel<T>::head_param_names(QuestionType qtype) const {
  const std::string name = qtype == QuestionType::QueryAction ? "action"
                           : qtype == QuestionType::QueryDirection ? "direction"
                                                                   : "body_part";
  return {"head." + name + ".w1", "head." + name + ".b1", "head." + name + ".w2",
          "head." + name + ".b2"};
}

template <class T>
typename ImoreModel<T>::AttnBlockOut ImoreModel<T>::attn_block(ForwardCtx<T>& ctx,
                                                               const std::string& prefix,
                                                               Var<T> q_in, Var<T> kv_in) const {
  Var<T> q = matmul(q_in, ctx.p(prefix + ".wq"));
  Var<T> k = matmul(kv_in, ctx.p(prefix + ".wk"));
  Var<T> v = matmul(kv_in, ctx.p(prefix + ".wv"));
  auto att = attention(q, k, v);
  Var<T> dropped = ctx.drop(att.output);
  Var<T> out = layer_norm(add(q_in, dropped), ctx.p(prefix + ".ln.g"), ctx.p(prefix + ".ln.b"));
  return {out, att.weights, att.output};
}

template <class T>
Var<T> ImoreModel<T>::encoder_block(ForwardCtx<T>& ctx, const std::string& prefix,
                                    Var<T> x) const {
  Var<T> q = matmul(x, ctx.p(prefix + ".attn.wq"));
  Var<T> k = matmul(x, ctx.p(prefix + ".attn.wk"));
  Var<T> v = matmul(x, ctx.p(prefix + ".attn.wv"));
  Var<T> att;
  if (config_.enc_heads == 1) {
    att = attention(q, k, v).output;
  } else {
    const int dh = config_.d / config_.enc_heads;
    std::vector<Var<T>> heads;
    for (int h = 0; h < config_.enc_heads; ++h) {
      heads.push_back(attention(slice_cols(q, h * dh, dh), slice_cols(k, h * dh, dh),
                                slice_cols(v, h * dh, dh))
                          .output);
    }
    att = concat_cols(heads);
  }
  att = matmul(att, ctx.p(prefix + ".attn.wo"));
  x = layer_norm(add(x, ctx.drop(att)), ctx.p(prefix + ".attn.ln.g"),
                 ctx.p(prefix + ".attn.ln.b"));
  Var<T> h = relu(linear(x, ctx.p(prefix + ".ffn.w1"), ctx.p(prefix + ".ffn.b1")));
  Var<T> y = linear(h, ctx.p(prefix + ".ffn.w2"), ctx.p(prefix + ".ffn.b2"));
  return layer_norm(add(x, ctx.drop(y)), ctx.p(prefix + ".ffn.ln.g"),
                    ctx.p(prefix + ".ffn.ln.b"));
}

template <class T>
Var<T> ImoreModel<T>::encode_text(ForwardCtx<T>& ctx, const std::vector<int>& token_ids) const {
  std::vector<int> ids = token_ids;
  if (static_cast<int>(ids.size()) > config_.max_text_len) ids.resize(config_.max_text_len);
  if (ids.empty()) ids.push_back(0);
  std::vector<int> pos(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) pos[i] = static_cast<int>(i);
  Var<T> x = add(embedding_rows(ctx.p("txt.tok"), ids), embedding_rows(ctx.p("txt.pos"), pos));
  for (int i = 0; i < config_.text_blocks; ++i) {
    x = encoder_block(ctx, "txt.b" + std::to_string(i), x);
  }
  return x;
}

template <class T>
std::pair<std::vector<Var<T>>, Var<T>> ImoreModel<T>::encode_window(
    ForwardCtx<T>& ctx, const std::vector<Mat<T>>& group_mats) const {
  const auto& groups = patch_groups();
  std::vector<int> pos_ids(config_.n_tpatch());
  for (int i = 0; i < config_.n_tpatch(); ++i) pos_ids[i] = i;
  Var<T> pos = embedding_rows(ctx.p("enc.pos"), pos_ids);

  std::vector<Var<T>> tokens;
  for (size_t g = 0; g < groups.size(); ++g) {
    Var<T> x = linear(ctx.tape.value(group_mats[g]), ctx.p("enc.patch" + std::to_string(g) + ".W"),
                      ctx.p("enc.patch" + std::to_string(g) + ".b"));
    x = add(x, pos);
    x = add_rowvec(x, embedding_rows(ctx.p("enc.group"), {static_cast<int>(g)}));
    tokens.push_back(x);
  }
  Var<T> x = concat_rows(tokens);

  std::vector<Var<T>> levels;
  const auto wanted = config_.effective_levels();
  for (int b = 0; b < config_.enc_blocks; ++b) {
    x = encoder_block(ctx, "enc.b" + std::to_string(b), x);
    if (std::find(wanted.begin(), wanted.end(), b) != wanted.end()) levels.push_back(x);
  }
  Var<T> final = layer_norm(x, ctx.p("enc.final_ln.g"), ctx.p("enc.final_ln.b"));
  return {levels, final};
}

template <class T>
ForwardOut<T> ImoreModel<T>::forward(ForwardCtx<T>& ctx, const ModelInput<T>& input) const {
  const int p = static_cast<int>(input.steps.size());
  if (p == 0) throw ShapeError("forward: empty program");
  if (config_.variant == Variant::MacControl && p > config_.max_steps) {
    throw ConfigError("program longer than max_steps for the MacControl variant");
  }

  // Encode every window, then concatenate per level across windows.
  std::vector<std::vector<Var<T>>> level_parts(config_.effective_levels().size());
  std::vector<Var<T>> final_parts;
  for (const auto& window : input.windows) {
    auto [levels, final] = encode_window(ctx, window);
    for (size_t k = 0; k < levels.size(); ++k) level_parts[k].push_back(levels[k]);
    final_parts.push_back(final);
  }
  Var<T> f_m = final_parts.size() == 1 ? final_parts[0] : concat_rows(final_parts);

  // Text-aware fusion of the final motion feature, then question type.
  Var<T> f_t = encode_text(ctx, input.question_tokens);
  Var<T> f_qt = encode_text(ctx, input.qtype_tokens);
  auto fused_text = attn_block(ctx, "fuse.text", f_m, f_t);
  auto fused_qtype = attn_block(ctx, "fuse.qtype", fused_text.out, f_qt);
  Var<T> h_m = fused_qtype.out;

  // Knowledge pool: projected intermediate levels plus the fused final
  // output, each row tagged with its level embedding.
  std::vector<Var<T>> pool_levels;
  for (size_t k = 0; k < level_parts.size(); ++k) {
    Var<T> lvl = level_parts[k].size() == 1 ? level_parts[k][0] : concat_rows(level_parts[k]);
    pool_levels.push_back(matmul(lvl, ctx.p("pool.proj" + std::to_string(k) + ".W")));
  }
  if (config_.pool_final || pool_levels.empty()) {
    pool_levels.push_back(matmul(h_m, ctx.p("pool.projF.W")));
  }
  const int n_levels = static_cast<int>(pool_levels.size());
  for (int k = 0; k < n_levels; ++k) {
    pool_levels[k] = add_rowvec(pool_levels[k], embedding_rows(ctx.p("pool.tag"), {k}));
  }
  Var<T> pool = n_levels == 1 ? pool_levels[0] : concat_rows(pool_levels);
  const int positions = static_cast<int>(ctx.tape.val(pool).rows()) / n_levels;

  // Program step embeddings.
  Var<T> P;
  if (config_.variant == Variant::MacControl) {
    std::vector<Var<T>> rows;
    Var<T> cq = ctx.p("ctrl.query");
    Var<T> k = matmul(f_t, ctx.p("ctrl.wk"));
    Var<T> v = matmul(f_t, ctx.p("ctrl.wv"));
    for (int i = 0; i < p; ++i) {
      Var<T> q = matmul(slice_rows(cq, i, 1), ctx.p("ctrl.wq"));
      rows.push_back(attention(q, k, v).output);
    }
    P = layer_norm(concat_rows(rows), ctx.p("ctrl.ln.g"), ctx.p("ctrl.ln.b"));
  } else {
    Var<T> func_rows = embedding_rows(ctx.p("prog.func"), input.step_func_ids);
    Var<T> concept_rows = matmul(embedding_rows(ctx.p("prog.concept"), input.step_concept_ids),
                                 ctx.p("prog.cproj.W"));
    P = layer_norm(add(func_rows, concept_rows), ctx.p("prog.ln.g"), ctx.p("prog.ln.b"));
  }

  ForwardOut<T> out;
  out.branch = input.question_type;
  out.trace.fusion_text_weights = ctx.tape.val(fused_text.weights);
  out.trace.fusion_qtype_weights = ctx.tape.val(fused_qtype.weights);
  out.trace.positions = positions;
  out.trace.levels = n_levels;
  out.fusion_text_pre = fused_text.pre_residual;
  out.fusion_qtype_pre = fused_qtype.pre_residual;

  // Iterative reasoning: dependency attention, then program-guided reading.
  std::vector<Var<T>> memory(p + 1);
  memory[0] = ctx.p("mem.s0");
  for (int i = 0; i < p; ++i) {
    const auto& step = input.steps[i];
    std::vector<Var<T>> dep_mems;
    for (int dep : step.deps) dep_mems.push_back(memory[dep + 1]);
    if (dep_mems.empty()) dep_mems.push_back(memory[0]);
    Var<T> dep_kv = dep_mems.size() == 1 ? dep_mems[0] : concat_rows(dep_mems);

    Var<T> q = slice_rows(P, i, 1);
    auto dep_att = attn_block(ctx, "mem.dep", q, dep_kv);
    auto read_att = attn_block(ctx, "mem.read", dep_att.out, pool);
    memory[i + 1] = read_att.out;

    StepAttn<T> trace;
    trace.func = step.func;
    trace.concept_arg = step.concept_arg;
    trace.dep_indices = step.deps;
    trace.dep_weights = ctx.tape.val(dep_att.weights);
    trace.pool_weights = ctx.tape.val(read_att.weights);
    trace.level_marginal.resize(n_levels);
    for (int k = 0; k < n_levels; ++k) {
      T mass = 0;
      for (int c = 0; c < positions; ++c) {
        mass += trace.pool_weights(0, k * positions + c);
      }
      trace.level_marginal[k] = mass;
    }
    out.trace.steps.push_back(std::move(trace));
  }

  // Multi-branch classifier; only the branch of the question type runs.
  const std::string head = input.question_type == QuestionType::QueryAction ? "head.action"
                           : input.question_type == QuestionType::QueryDirection
                               ? "head.direction"
                               : "head.body_part";
  Var<T> hidden = relu(linear(memory[p], ctx.p(head + ".w1"), ctx.p(head + ".b1")));
  out.logits = linear(ctx.drop(hidden), ctx.p(head + ".w2"), ctx.p(head + ".b2"));
  return out;
}

// --- featurizer ---------------------------------------------------------------

template <class T>
ModelInput<T> Featurizer::make_input(const MotionSequence& motion, const std::string& question,
                                     const Program& program,
                                     const std::vector<int>& window_starts) const {
  const int tp = config_.temporal_patch;
  const int T_raw = motion.frame_count();
  const auto& groups = patch_groups();

  ModelInput<T> input;
  input.question_tokens = tokenizer_.encode(question);
  input.qtype_tokens = tokenizer_.encode(question_type_phrase(program.question_type));
  input.question_type = program.question_type;
  input.steps = program.steps;
  for (const auto& step : program.steps) {
    input.step_func_ids.push_back(static_cast<int>(step.func));
    input.step_concept_ids.push_back(step.concept_arg ? concept_id(vocab_, *step.concept_arg)
                                                      : null_concept_id(vocab_));
  }

  for (int start : window_starts) {
    std::vector<Mat<T>> group_mats;
    for (const auto& group : groups) {
      const int in_dim = tp * static_cast<int>(group.joints.size()) * 3;
      Mat<T> m(config_.n_tpatch(), in_dim);
      for (int ti = 0; ti < config_.n_tpatch(); ++ti) {
        int col = 0;
        for (int f = 0; f < tp; ++f) {
          // loop-pad short sequences
          const int frame = (start + ti * tp + f) % std::max(T_raw, 1);
          for (int j : group.joints) {
            m(ti, col++) = static_cast<T>(motion.frames.at(frame, j, 0));
            m(ti, col++) = static_cast<T>(motion.frames.at(frame, j, 1));
            m(ti, col++) = static_cast<T>(motion.frames.at(frame, j, 2));
          }
        }
      }
      group_mats.push_back(std::move(m));
    }
    input.windows.push_back(std::move(group_mats));
    for (size_t g = 0; g < groups.size(); ++g) {
      for (int ti = 0; ti < config_.n_tpatch(); ++ti) {
        input.token_frame_spans.emplace_back(start + ti * tp, start + (ti + 1) * tp);
      }
    }
  }
  return input;
}

// --- inference modes -----------------------------------------------------------

template <class T>
InferenceOut<T> run_forward(const ImoreModel<T>& model, const Featurizer& featurizer,
                            const MotionSequence& motion, const std::string& question,
                            const Program& program, const std::vector<int>& starts) {
  Tape<T> tape;
  ForwardCtx<T> ctx{tape, model.params()};
  ModelInput<T> input = featurizer.make_input<T>(motion, question, program, starts);
  ForwardOut<T> out = model.forward(ctx, input);
  InferenceOut<T> result;
  result.logits = tape.val(out.logits);
  result.branch = out.branch;
  result.trace = std::move(out.trace);
  result.token_frame_spans = std::move(input.token_frame_spans);
  result.selected_start = starts.empty() ? 0 : starts[0];
  return result;
}

template <class T>
InferenceOut<T> infer_mode1(const ImoreModel<T>& model, const Featurizer& featurizer,
                            const MotionSequence& motion, const std::string& question,
                            const Program& program) {
  return run_forward(model, featurizer, motion, question, program,
                     featurizer.mode1_starts(motion.frame_count()));
}

template <class T>
InferenceOut<T> infer_mode2(const ImoreModel<T>& model, const Featurizer& featurizer,
                            const MotionSequence& motion, const std::string& question,
                            const Program& program, int runs, std::uint64_t seed) {
  if (runs < 1) throw ConfigError("mode II needs at least one run");
  Rng rng(seed);
  const int range = featurizer.start_range(motion.frame_count());
  InferenceOut<T> best;
  double best_score = 0.0;
  for (int r = 0; r < runs; ++r) {
    const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(range)));
    InferenceOut<T> run = run_forward(model, featurizer, motion, question, program, {start});
    run.selected_start = start;
    double score;
    if (model.config().mode2_select_prob) {
      // max softmax probability
      const auto& l = run.logits;
      const T m = l.row(0).maxCoeff();
      double z = 0;
      for (int c = 0; c < l.cols(); ++c) z += std::exp(static_cast<double>(l(0, c) - m));
      score = 1.0 / z;
    } else {
      score = static_cast<double>(run.logits.row(0).maxCoeff());
    }
    if (r == 0 || score > best_score) {
      best_score = score;
      best = std::move(run);
    }
  }
  return best;
}

}  // namespace imore

#endif
