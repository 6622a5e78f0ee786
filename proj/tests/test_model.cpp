// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "imore/gradcheck.hpp"
#include "imore/model.hpp"
#include "imore/train.hpp"

using namespace imore;

namespace {

struct Setup {
  DatasetManifest manifest;
  std::map<std::string, MotionSequence> motions;
  ModelConfig config;
  Featurizer featurizer;
  const QAExample& example(size_t i) const { return manifest.examples.at(i); }
};

ModelConfig small_config() {
  ModelConfig c;
  c.window = 32;
  c.temporal_patch = 8;
  c.d = 24;
  c.enc_blocks = 2;
  c.ffn_mult = 2;
  c.pool_levels = {0, 1};
  c.pool_final = true;
  c.text_blocks = 1;
  c.dropout = 0.1;
  return c;
}

Setup make_setup(ModelConfig config = small_config(), int n_motions = 24) {
  auto vocab = default_vocabulary();
  MotionConfig mconfig;
  mconfig.segments_per_seq = 3;
  mconfig.min_frames_per_segment = 10;
  mconfig.max_frames_per_segment = 12;
  std::vector<MotionSequence> motions;
  std::map<std::string, MotionSequence> by_id;
  for (int i = 0; i < n_motions; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "m%04d", i);
    motions.push_back(generate_sequence(mix_seed(400, i), mconfig, vocab, id));
    by_id[id] = motions.back();
  }
  DatasetConfig dconfig;
  dconfig.per_cell_quota = 6;
  dconfig.allow_underfull = true;
  DatasetManifest manifest = generate_dataset(motions, 4, dconfig, vocab);
  ModelConfig bound = bind_config(config, manifest);
  Featurizer featurizer(bound, build_tokenizer(manifest), vocab);
  return Setup{std::move(manifest), std::move(by_id), bound, std::move(featurizer)};
}

template <class T>
ForwardOut<T> run_one(const Setup& s, const ImoreModel<T>& model, Tape<T>& tape,
                      const QAExample& ex, Rng* dropout_rng = nullptr) {
  const auto& motion = s.motions.at(ex.motion_id);
  ForwardCtx<T> ctx{tape, model.params(), dropout_rng,
                    static_cast<T>(dropout_rng ? model.config().dropout : 0.0)};
  ModelInput<T> input = s.featurizer.make_input<T>(
      motion, ex.question, ex.program, s.featurizer.mode1_starts(motion.frame_count()));
  return model.forward(ctx, input);
}

}  // namespace

TEST_CASE("encoder produces the configured number of equal-shaped pool levels") {
  Setup s = make_setup();
  ImoreModel<float> model(s.config, 1);
  Tape<float> tape;
  const auto& ex = s.example(0);
  const int n_windows = static_cast<int>(
      s.featurizer.mode1_starts(s.motions.at(ex.motion_id).frame_count()).size());
  auto out = run_one(s, model, tape, ex);
  // pool levels 0,1 plus the fused final output
  CHECK(out.trace.levels == 3);
  CHECK(out.trace.positions == n_windows * s.config.tokens_per_window());
  for (const auto& step : out.trace.steps) {
    CHECK(step.pool_weights.cols() == out.trace.levels * out.trace.positions);
  }
}

TEST_CASE("default pool selection is the intermediate layers plus the final output") {
  ModelConfig c;
  CHECK(c.pool_levels == std::vector<int>{0, 1, 2, 3});
  CHECK(c.pool_final);
  CHECK(c.enc_blocks == 4);
  CHECK(c.level_count() == 5);
  // desk-scale defaults
  CHECK(c.window == 64);
  CHECK(c.d == 64);
  CHECK(c.dropout == doctest::Approx(0.1));
}

TEST_CASE("permuting frames within one temporal patch changes only that patch's tokens") {
  Setup s = make_setup();
  const auto& ex = s.example(0);
  MotionSequence motion = s.motions.at(ex.motion_id);
  const int tp = s.config.temporal_patch;

  MotionSequence permuted = motion;
  const int patch_idx = 1;
  // reverse the frames of temporal patch 1
  for (int f = 0; f < tp / 2; ++f) {
    for (int j = 0; j < kJointCount; ++j) {
      for (int axis = 0; axis < 3; ++axis) {
        std::swap(permuted.frames.at(patch_idx * tp + f, j, axis),
                  permuted.frames.at(patch_idx * tp + (tp - 1 - f), j, axis));
      }
    }
  }

  auto a = s.featurizer.make_input<float>(motion, ex.question, ex.program, {0});
  auto b = s.featurizer.make_input<float>(permuted, ex.question, ex.program, {0});
  for (size_t g = 0; g < a.windows[0].size(); ++g) {
    for (int row = 0; row < a.windows[0][g].rows(); ++row) {
      if (row == patch_idx) {
        CHECK(a.windows[0][g].row(row) != b.windows[0][g].row(row));
      } else {
        CHECK(a.windows[0][g].row(row) == b.windows[0][g].row(row));
      }
    }
  }
}

TEST_CASE("text encoding: identical questions give identical features, OOV maps to <unk>") {
  Setup s = make_setup();
  ImoreModel<float> model(s.config, 1);
  const auto& ex = s.example(0);

  Tape<float> t1, t2;
  auto o1 = run_one(s, model, t1, ex);
  auto o2 = run_one(s, model, t2, ex);
  CHECK(t1.val(o1.logits) == t2.val(o2.logits));

  // OOV words become <unk> (id 0) and the forward still runs
  const auto ids = s.featurizer.tokenizer().encode("what zzzunseen word");
  CHECK(ids[1] == 0);
  QAExample oov = ex;
  oov.question = "What zzzunseen does the person do?";
  Tape<float> t3;
  const auto& motion = s.motions.at(oov.motion_id);
  ForwardCtx<float> ctx{t3, model.params()};
  auto input = s.featurizer.make_input<float>(motion, oov.question, oov.program, {0});
  CHECK_NOTHROW(model.forward(ctx, input));
}

TEST_CASE("fusion with a single-token question degenerates to that token's value projection") {
  Setup s = make_setup();
  ImoreModel<float> model(s.config, 1);
  const auto& ex = s.example(0);
  const auto& motion = s.motions.at(ex.motion_id);

  Tape<float> tape;
  ForwardCtx<float> ctx{tape, model.params()};
  ModelInput<float> input = s.featurizer.make_input<float>(motion, ex.question, ex.program, {0});
  input.question_tokens = {3};  // single token
  ForwardOut<float> out = model.forward(ctx, input);

  // every pre-residual fusion row equals the single key's value projection
  const Mat<float>& pre = tape.val(out.fusion_text_pre);
  for (int r = 1; r < pre.rows(); ++r) {
    CHECK((pre.row(r) - pre.row(0)).cwiseAbs().maxCoeff() < 1e-6f);
  }
  const Mat<float>& w = out.trace.fusion_text_weights;
  CHECK(w.cols() == 1);
  for (int r = 0; r < w.rows(); ++r) CHECK(w(r, 0) == doctest::Approx(1.f));
}

TEST_CASE("program embedding locality and trainability") {
  Setup s = make_setup();
  ImoreModel<double> model(s.config, 1);
  auto vocab = s.featurizer.vocab();

  // locate an example whose program is a 3-step before-relate
  Program pa = parse_program("query_action(relate(before, filter_action(squat)))", vocab);
  Program pb = parse_program("query_action(relate(before, filter_action(jump)))", vocab);
  const auto& ex = s.example(0);
  const auto& motion = s.motions.at(ex.motion_id);

  Tape<double> tape;
  ForwardCtx<double> ctx{tape, model.params()};
  auto ia = s.featurizer.make_input<double>(motion, ex.question, pa, {0});
  auto ib = s.featurizer.make_input<double>(motion, ex.question, pb, {0});
  CHECK(ia.step_func_ids == ib.step_func_ids);
  REQUIRE(ia.step_concept_ids.size() == 3);
  CHECK(ia.step_concept_ids[0] != ib.step_concept_ids[0]);  // filter step differs
  CHECK(ia.step_concept_ids[1] == ib.step_concept_ids[1]);
  CHECK(ia.step_concept_ids[2] == ib.step_concept_ids[2]);

  // p trace entries for a p-step program, and program tables receive grads
  ForwardOut<double> out = model.forward(ctx, ia);
  CHECK(out.trace.steps.size() == 3);
  Var<double> loss = cross_entropy(out.logits, 0);
  tape.backward(loss);
  const Var<double> func_leaf = ctx.bound.at(model.params().index_of("prog.func"));
  const Var<double> concept_leaf = ctx.bound.at(model.params().index_of("prog.concept"));
  CHECK(tape.grad(func_leaf).cwiseAbs().maxCoeff() > 0.0);
  CHECK(tape.grad(concept_leaf).cwiseAbs().maxCoeff() > 0.0);
  // gradient flows into both motion and text streams
  CHECK(tape.grad(ctx.bound.at(model.params().index_of("enc.patch0.W"))).cwiseAbs().maxCoeff() >
        0.0);
  CHECK(tape.grad(ctx.bound.at(model.params().index_of("txt.tok"))).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("reasoning steps: dependency attention is restricted to dep memories") {
  Setup s = make_setup();
  ImoreModel<float> model(s.config, 1);
  auto vocab = s.featurizer.vocab();
  const auto& ex = s.example(0);
  const auto& motion = s.motions.at(ex.motion_id);

  Program p3 = parse_program("query_action(relate(before, filter_direction(left)))", vocab);
  Tape<float> tape;
  ForwardCtx<float> ctx{tape, model.params()};
  auto input = s.featurizer.make_input<float>(motion, ex.question, p3, {0});
  ForwardOut<float> out = model.forward(ctx, input);

  REQUIRE(out.trace.steps.size() == 3);
  // leaf filter: no deps, attends to S0 alone with weight exactly 1
  CHECK(out.trace.steps[0].dep_indices.empty());
  CHECK(out.trace.steps[0].dep_weights.cols() == 1);
  CHECK(out.trace.steps[0].dep_weights(0, 0) == doctest::Approx(1.f));
  // relate depends exactly on the filter step's memory
  CHECK(out.trace.steps[1].dep_indices == std::vector<int>{0});
  CHECK(out.trace.steps[1].dep_weights.cols() == 1);
  // query depends on the relate step
  CHECK(out.trace.steps[2].dep_indices == std::vector<int>{1});

  // between-programs attend over two dependency memories
  Program p4 = parse_program(
      "query_action(relate(between, filter_action(squat), filter_action(jump)))", vocab);
  Tape<float> tape2;
  ForwardCtx<float> ctx2{tape2, model.params()};
  auto input4 = s.featurizer.make_input<float>(motion, ex.question, p4, {0});
  ForwardOut<float> out4 = model.forward(ctx2, input4);
  REQUIRE(out4.trace.steps.size() == 4);
  CHECK(out4.trace.steps[2].dep_indices == std::vector<int>{0, 1});
  CHECK(out4.trace.steps[2].dep_weights.cols() == 2);
  CHECK(out4.trace.steps[2].dep_weights.row(0).sum() == doctest::Approx(1.f));
}

TEST_CASE("attention normalization across 20 random forwards") {
  Setup s = make_setup();
  ImoreModel<float> model(s.config, 3);
  const float tol = 1e-6f;
  for (size_t i = 0; i < 20 && i < s.manifest.examples.size(); ++i) {
    Tape<float> tape;
    auto out = run_one(s, model, tape, s.example(i));
    for (int r = 0; r < out.trace.fusion_text_weights.rows(); ++r) {
      CHECK(std::fabs(out.trace.fusion_text_weights.row(r).sum() - 1.f) < tol);
    }
    for (int r = 0; r < out.trace.fusion_qtype_weights.rows(); ++r) {
      CHECK(std::fabs(out.trace.fusion_qtype_weights.row(r).sum() - 1.f) < tol);
    }
    for (const auto& step : out.trace.steps) {
      CHECK(std::fabs(step.dep_weights.row(0).sum() - 1.f) < tol);
      CHECK(std::fabs(step.pool_weights.row(0).sum() - 1.f) < tol);
      CHECK(step.pool_weights.minCoeff() >= 0.f);
      float marginal_sum = 0.f;
      for (float m : step.level_marginal) marginal_sum += m;
      CHECK(std::fabs(marginal_sum - 1.f) < tol);
    }
  }
}

TEST_CASE("branch exclusivity: non-selected head parameters never touch the logits") {
  Setup s = make_setup();
  ImoreModel<float> model(s.config, 5);
  const auto& ex = s.example(0);

  Tape<float> t1;
  auto before = t1.val(run_one(s, model, t1, ex).logits);

  // randomize every head except the selected branch
  Rng rng(123);
  for (QuestionType qt : {QuestionType::QueryAction, QuestionType::QueryDirection,
                          QuestionType::QueryBodyPart}) {
    if (qt == ex.question_type) continue;
    for (const auto& name : model.head_param_names(qt)) {
      auto& p = model.params().at(name);
      p.value = random_normal<float>(static_cast<int>(p.value.rows()),
                                     static_cast<int>(p.value.cols()), 1.0, rng);
    }
  }
  Tape<float> t2;
  auto after = t2.val(run_one(s, model, t2, ex).logits);
  CHECK(before == after);  // bitwise

  // perturbing the selected head does change them
  auto& w = model.params().at(model.head_param_names(ex.question_type)[0]);
  w.value(0, 0) += 1.0f;
  Tape<float> t3;
  auto changed = t3.val(run_one(s, model, t3, ex).logits);
  CHECK(before != changed);
}

TEST_CASE("end-to-end gradient check at d=16 passes 1e-4 in 64-bit") {
  ModelConfig c;
  c.window = 16;
  c.temporal_patch = 8;
  c.d = 16;
  c.enc_blocks = 2;
  c.ffn_mult = 2;
  c.pool_levels = {0};
  c.pool_final = true;  // M=2 levels
  c.text_blocks = 1;
  c.dropout = 0.0;
  Setup s = make_setup(c, 12);
  ImoreModel<double> model(s.config, 7);

  // a 4-step between-program exercises the dependency attention fully
  Program program = parse_program(
      "query_direction(relate(between, filter_action(squat), filter_action(jump)))",
      s.featurizer.vocab());
  const auto& ex = s.example(0);
  const auto& motion = s.motions.at(ex.motion_id);
  const int target = 2;

  auto loss_fn = [&]() {
    Tape<double> tape;
    ForwardCtx<double> ctx{tape, model.params()};
    auto input = s.featurizer.make_input<double>(motion, ex.question, program, {0});
    auto out = model.forward(ctx, input);
    return tape.val(cross_entropy(out.logits, target))(0, 0);
  };
  Tape<double> tape;
  ForwardCtx<double> ctx{tape, model.params()};
  auto input = s.featurizer.make_input<double>(motion, ex.question, program, {0});
  auto out = model.forward(ctx, input);
  tape.backward(cross_entropy(out.logits, target));
  GradBuffer<double> buf(model.params());
  buf.accumulate(tape, ctx);

  GradCheckReport report = grad_check<double>(model.params(), loss_fn, buf.mean(), 1e-5, 1e-4,
                                              /*seed=*/11, /*coords=*/24);
  CAPTURE(report.to_text());
  CHECK(report.pass);
}

TEST_CASE("mode I and mode II coincide bitwise on sequences of exactly W frames") {
  ModelConfig c = small_config();
  Setup s = make_setup(c);
  ImoreModel<float> model(s.config, 9);

  // build a motion with exactly W frames
  auto vocab = default_vocabulary();
  MotionConfig mc;
  mc.segments_per_seq = 2;
  mc.min_frames_per_segment = s.config.window / 2;
  mc.max_frames_per_segment = s.config.window / 2;
  MotionSequence motion = generate_sequence(77, mc, vocab, "exact");
  REQUIRE(motion.frame_count() == s.config.window);

  const auto& ex = s.example(0);
  auto m1 = infer_mode1(model, s.featurizer, motion, ex.question, ex.program);
  auto m2 = infer_mode2(model, s.featurizer, motion, ex.question, ex.program, 1, 42);
  CHECK(m1.logits == m2.logits);  // bitwise
  CHECK(m2.selected_start == 0);
}

TEST_CASE("mode II is deterministic and selects the max-logit run") {
  Setup s = make_setup();
  ImoreModel<float> model(s.config, 11);
  auto vocab = default_vocabulary();
  MotionConfig mc;
  mc.segments_per_seq = 4;
  mc.min_frames_per_segment = 14;
  mc.max_frames_per_segment = 18;
  MotionSequence motion = generate_sequence(88, mc, vocab, "long");
  REQUIRE(motion.frame_count() > s.config.window);

  const auto& ex = s.example(0);
  auto a = infer_mode2(model, s.featurizer, motion, ex.question, ex.program, 5, 1234);
  auto b = infer_mode2(model, s.featurizer, motion, ex.question, ex.program, 5, 1234);
  CHECK(a.logits == b.logits);
  CHECK(a.selected_start == b.selected_start);

  // replay the same start stream and verify the selection is the argmax
  Rng rng(1234);
  const int range = s.featurizer.start_range(motion.frame_count());
  float best = -1e30f;
  for (int r = 0; r < 5; ++r) {
    const int start = static_cast<int>(rng.below(range));
    auto run = run_forward(model, s.featurizer, motion, ex.question, ex.program, {start});
    best = std::max(best, run.logits.row(0).maxCoeff());
  }
  CHECK(a.logits.row(0).maxCoeff() == doctest::Approx(best));
}

TEST_CASE("mode I covers long sequences with right-aligned last window") {
  ModelConfig c = small_config();
  Setup s = make_setup(c);
  CHECK(s.featurizer.mode1_starts(32) == std::vector<int>{0});
  CHECK(s.featurizer.mode1_starts(64) == std::vector<int>{0, 32});
  CHECK(s.featurizer.mode1_starts(75) == std::vector<int>{0, 32, 43});
  CHECK(s.featurizer.mode1_starts(20) == std::vector<int>{0});  // loop-padded
  CHECK(s.featurizer.start_range(20) == 1);
  CHECK(s.featurizer.start_range(40) == 9);
}

TEST_CASE("variants change the parameter inventory as expected") {
  Setup full = make_setup();
  ModelConfig nofs = full.config;
  nofs.variant = Variant::NoFeatureSelection;
  ModelConfig mac = full.config;
  mac.variant = Variant::MacControl;

  ImoreModel<float> d(full.config, 1);
  ImoreModel<float> c(nofs, 1);
  ImoreModel<float> b(mac, 1);

  // D has per-level projections and tags; C collapses to one level
  CHECK(d.params().contains("pool.proj0.W"));
  CHECK(d.params().contains("pool.proj1.W"));
  CHECK(d.params().contains("pool.projF.W"));
  CHECK(d.params().at("pool.tag").value.rows() == 3);
  CHECK(!c.params().contains("pool.proj0.W"));
  CHECK(c.params().contains("pool.projF.W"));
  CHECK(c.params().at("pool.tag").value.rows() == 1);
  CHECK(d.params().scalar_count() > c.params().scalar_count());

  // MacControl swaps the program tables for control queries
  CHECK(b.params().contains("ctrl.query"));
  CHECK(!b.params().contains("prog.func"));
  CHECK(d.params().contains("prog.func"));

  // MacControl still runs forward
  Tape<float> tape;
  auto out = run_one(full, b, tape, full.example(0));
  CHECK(out.trace.steps.size() == full.example(0).program.steps.size());
}
