// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "imore/train.hpp"

using namespace imore;

namespace {

struct Data {
  DatasetManifest manifest;
  std::map<std::string, MotionSequence> motions;
  std::vector<MotionSequence> motion_list;
};

Data make_data(int n_motions = 40, int quota = 6, std::uint64_t seed = 300) {
  auto vocab = default_vocabulary();
  MotionConfig mconfig;
  mconfig.segments_per_seq = 3;
  mconfig.min_frames_per_segment = 10;
  mconfig.max_frames_per_segment = 12;
  Data data;
  for (int i = 0; i < n_motions; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "m%04d", i);
    data.motion_list.push_back(generate_sequence(mix_seed(seed, i), mconfig, vocab, id));
    data.motions[id] = data.motion_list.back();
  }
  DatasetConfig dconfig;
  dconfig.per_cell_quota = quota;
  dconfig.allow_underfull = true;
  data.manifest = generate_dataset(data.motion_list, seed, dconfig, vocab);
  return data;
}

ModelConfig tiny_model() {
  ModelConfig c;
  c.window = 32;
  c.temporal_patch = 8;
  c.d = 24;
  c.enc_blocks = 2;
  c.ffn_mult = 2;
  c.pool_levels = {0, 1};
  c.text_blocks = 1;
  c.dropout = 0.0;
  return c;
}

}  // namespace

TEST_CASE("presets") {
  TrainConfig paper = paper_preset();
  CHECK(paper.lr == doctest::Approx(1e-6));
  CHECK(paper.batch_size == 4);
  CHECK(paper.weight_decay == doctest::Approx(1e-4));
  CHECK(paper.epochs == 100);
  CHECK(ModelConfig{}.dropout == doctest::Approx(0.1));

  TrainConfig desk = desk_preset();
  CHECK(desk.lr == doctest::Approx(3e-4));
  CHECK(desk.batch_size == 16);

  CHECK_THROWS_AS(preset_by_name("nope"), ConfigError);
  TrainConfig bad = desk;
  bad.lr = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = desk;
  bad.corruption_rate = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("program source parsing") {
  CHECK(ProgramSource::parse("gold").kind == ProgramSource::Kind::Gold);
  CHECK(ProgramSource::parse("predicted").kind == ProgramSource::Kind::Predicted);
  auto c = ProgramSource::parse("corrupted:0.25");
  CHECK(c.kind == ProgramSource::Kind::Corrupted);
  CHECK(c.rate == doctest::Approx(0.25));
  CHECK_THROWS_AS(ProgramSource::parse("corrupted:2"), ConfigError);
  CHECK_THROWS_AS(ProgramSource::parse("bogus"), ConfigError);
}

TEST_CASE("epoch loss equals the mean per-example cross entropy") {
  Data data = make_data(24, 4, 310);
  TrainConfig tc;
  tc.lr = 1e-30;  // below float resolution: parameters stay bitwise constant
  tc.epochs = 1;
  tc.batch_size = 8;
  tc.mode = 1;
  tc.seed = 9;
  Trained<float> trained = train_model<float>(data.manifest, data.motions, tiny_model(), tc);

  double total = 0.0;
  int count = 0;
  for (const auto& e : data.manifest.examples) {
    if (e.split != Split::Train) continue;
    const auto& motion = data.motions.at(e.motion_id);
    Tape<float> tape;
    ForwardCtx<float> ctx{tape, trained.model.params()};
    auto input = trained.featurizer.make_input<float>(
        motion, e.question, e.program, trained.featurizer.mode1_starts(motion.frame_count()));
    auto out = trained.model.forward(ctx, input);
    const int target = data.manifest.vocab.index_of(e.answer.kind, e.answer.label);
    // hand-computed -log softmax(correct logit)
    const Mat<float>& logits = tape.val(out.logits);
    double z = 0.0;
    const double m = logits.row(0).maxCoeff();
    for (int i = 0; i < logits.cols(); ++i) z += std::exp(static_cast<double>(logits(0, i)) - m);
    total += std::log(z) + m - static_cast<double>(logits(0, target));
    ++count;
  }
  REQUIRE(count > 0);
  CHECK(trained.stats.curve.at(0).train_loss == doctest::Approx(total / count).epsilon(1e-5));
}

TEST_CASE("overfit: 32+ examples reach 100% train accuracy") {
  Data data = make_data(40, 6, 320);
  int n_train = 0;
  for (const auto& e : data.manifest.examples) n_train += e.split == Split::Train;
  REQUIRE(n_train >= 32);

  TrainConfig tc;
  tc.lr = 2e-3;
  tc.epochs = 200;
  tc.batch_size = 8;
  tc.mode = 1;
  tc.seed = 1;
  Trained<float> trained = train_model<float>(data.manifest, data.motions, tiny_model(), tc);
  EvalReport report = evaluate_model(trained.model, trained.featurizer, data.manifest,
                                     data.motions, Split::Train, 1, ProgramSource::gold());
  CHECK(report.overall == doctest::Approx(1.0));
}

TEST_CASE("training is deterministic: identical curves and checkpoints") {
  Data data = make_data(24, 3, 330);
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 8;
  tc.seed = 5;
  ModelConfig mc = tiny_model();
  mc.dropout = 0.1;  // exercise the dropout rng path too

  Trained<float> a = train_model<float>(data.manifest, data.motions, mc, tc);
  Trained<float> b = train_model<float>(data.manifest, data.motions, mc, tc);
  REQUIRE(a.stats.curve.size() == b.stats.curve.size());
  for (size_t i = 0; i < a.stats.curve.size(); ++i) {
    CHECK(a.stats.curve[i].train_loss == b.stats.curve[i].train_loss);
    CHECK(a.stats.curve[i].val_accuracy == b.stats.curve[i].val_accuracy);
  }
  save_model_checkpoint("ckpt_a.imck", a.model, a.featurizer, "h", tc.seed);
  save_model_checkpoint("ckpt_b.imck", b.model, b.featurizer, "h", tc.seed);
  std::ifstream fa("ckpt_a.imck", std::ios::binary);
  std::ifstream fb("ckpt_b.imck", std::ios::binary);
  std::string ba((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string bb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(ba == bb);
  CHECK(!ba.empty());
  std::remove("ckpt_a.imck");
  std::remove("ckpt_b.imck");
}

TEST_CASE("checkpoint round-trip reproduces evaluation bit for bit") {
  Data data = make_data(24, 3, 340);
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 8;
  tc.seed = 2;
  Trained<float> trained = train_model<float>(data.manifest, data.motions, tiny_model(), tc);
  EvalReport before = evaluate_model(trained.model, trained.featurizer, data.manifest,
                                     data.motions, Split::Test, 1, ProgramSource::gold(), 7);
  save_model_checkpoint("ckpt_rt.imck", trained.model, trained.featurizer, "hash123", tc.seed);
  LoadedModel loaded = load_model_checkpoint("ckpt_rt.imck");
  CHECK(loaded.config_hash == "hash123");
  EvalReport after = evaluate_model(loaded.model, loaded.featurizer, data.manifest, data.motions,
                                    Split::Test, 1, ProgramSource::gold(), 7);
  CHECK(before.to_json() == after.to_json());
  std::remove("ckpt_rt.imck");
}

TEST_CASE("evaluate: corrupted at rate 0 equals gold bit for bit") {
  Data data = make_data(24, 3, 350);
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 8;
  Trained<float> trained = train_model<float>(data.manifest, data.motions, tiny_model(), tc);
  EvalReport gold = evaluate_model(trained.model, trained.featurizer, data.manifest, data.motions,
                                   Split::Test, 1, ProgramSource::gold(), 3);
  EvalReport zero = evaluate_model(trained.model, trained.featurizer, data.manifest, data.motions,
                                   Split::Test, 1, ProgramSource::corrupted(0.0), 3);
  // identical up to the source label
  zero.program_source = gold.program_source;
  CHECK(gold.to_json() == zero.to_json());
}

TEST_CASE("evaluate: report invariants and majority baseline") {
  Data data = make_data(30, 4, 360);
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 8;
  Trained<float> trained = train_model<float>(data.manifest, data.motions, tiny_model(), tc);
  EvalReport r = evaluate_model(trained.model, trained.featurizer, data.manifest, data.motions,
                                Split::Test, 1, ProgramSource::gold(), 1, /*workers=*/3);

  // overall equals the example-weighted mean of per-type accuracies
  int correct = 0, total = 0;
  for (const char* qt : {"query_action", "query_direction", "query_body_part"}) {
    const auto& cell = r.cells.at(std::string(qt) + ".all");
    correct += cell.correct;
    total += cell.total;
  }
  REQUIRE(total == r.total);
  CHECK(r.overall == doctest::Approx(static_cast<double>(correct) / total));

  // overall also recomputes from the confusion matrices
  int diag = 0, all = 0;
  for (const auto& [branch, matrix] : r.confusions) {
    for (size_t i = 0; i < matrix.size(); ++i) {
      for (size_t j = 0; j < matrix[i].size(); ++j) {
        all += matrix[i][j];
        if (i == j) diag += matrix[i][j];
      }
    }
  }
  // gold programs: every prediction lands in a confusion matrix
  CHECK(all == r.total);
  CHECK(r.overall == doctest::Approx(static_cast<double>(diag) / all));

  CHECK(r.majority_overall > 0.0);
  CHECK(r.majority_per_type.size() == 3);

  // single-worker evaluation gives the identical report
  EvalReport r1 = evaluate_model(trained.model, trained.featurizer, data.manifest, data.motions,
                                 Split::Test, 1, ProgramSource::gold(), 1, /*workers=*/1);
  CHECK(r1.to_json() == r.to_json());
}

TEST_CASE("zeroed cells are reported as N/A") {
  auto vocab = default_vocabulary();
  MotionConfig mconfig;
  mconfig.segments_per_seq = 3;
  mconfig.min_frames_per_segment = 10;
  mconfig.max_frames_per_segment = 12;
  std::vector<MotionSequence> motions;
  std::map<std::string, MotionSequence> by_id;
  for (int i = 0; i < 30; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "m%04d", i);
    motions.push_back(generate_sequence(mix_seed(370, i), mconfig, vocab, id));
    by_id[id] = motions.back();
  }
  DatasetConfig dconfig;
  dconfig.per_cell_quota = 4;
  dconfig.cell_overrides["query_direction.between"] = 0;
  dconfig.allow_underfull = true;
  DatasetManifest manifest = generate_dataset(motions, 370, dconfig, vocab);

  EvalReport r = explicit_baseline(manifest, by_id, Split::Test, ProgramSource::gold());
  CHECK(!r.cells.count("query_direction.between"));
  CHECK(r.to_table_text().find("N/A") != std::string::npos);
}

TEST_CASE("explicit baseline: gold is perfect, corrupted programs cascade") {
  Data data = make_data(40, 6, 380);
  EvalReport gold = explicit_baseline(data.manifest, data.motions, Split::Test,
                                      ProgramSource::gold());
  CHECK(gold.overall == doctest::Approx(1.0));

  EvalReport corrupted = explicit_baseline(data.manifest, data.motions, Split::Test,
                                           ProgramSource::corrupted(0.3), 4);
  CHECK(corrupted.overall < 1.0);
}

TEST_CASE("eval report json round-trip") {
  Data data = make_data(20, 2, 390);
  EvalReport r = explicit_baseline(data.manifest, data.motions, Split::Test,
                                   ProgramSource::gold());
  EvalReport back = EvalReport::from_json(r.to_json());
  CHECK(back.to_json() == r.to_json());
}

TEST_CASE("train rejects the untrainable explicit-oracle variant and empty splits") {
  Data data = make_data(20, 2, 395);
  TrainConfig tc;
  tc.ablation_variant = AblationVariant::ExplicitOracle;
  CHECK_THROWS_AS(train_model<float>(data.manifest, data.motions, tiny_model(), tc), ConfigError);

  DatasetManifest empty = data.manifest;
  empty.examples.clear();
  TrainConfig ok;
  CHECK_THROWS_AS(train_model<float>(empty, data.motions, tiny_model(), ok), ConfigError);
}

TEST_CASE("loss curve csv") {
  TrainStats stats;
  stats.curve.push_back({0, 1.5, 0.25});
  stats.curve.push_back({1, 1.25, 0.5});
  const std::string csv = loss_curve_csv(stats);
  CHECK(csv.find("epoch,train_loss,val_accuracy") == 0);
  CHECK(csv.find("1,1.25,0.5") != std::string::npos);
}

TEST_CASE("dataset directory round-trip") {
  Data data = make_data(12, 2, 399);
  save_dataset_dir("test_ds_dir", data.manifest, data.motion_list);
  LoadedDataset loaded = load_dataset_dir("test_ds_dir");
  CHECK(loaded.manifest.examples.size() == data.manifest.examples.size());
  CHECK(loaded.motions.size() <= data.motions.size());
  for (const auto& [id, motion] : loaded.motions) {
    CHECK(motion.frames.data == data.motions.at(id).frames.data);
  }
  std::filesystem::remove_all("test_ds_dir");
}
