// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <map>
#include <set>

#include "imore/dataset.hpp"
#include "imore/errors.hpp"

using namespace imore;

namespace {

struct SegSpec {
  std::string action;
  std::optional<std::string> direction;
  std::vector<std::string> parts;
  std::string primary;
};

MotionSequence make_motion(const std::string& id, const std::vector<SegSpec>& specs) {
  MotionSequence seq;
  seq.id = id;
  seq.frames.joint_count = kJointCount;
  int cursor = 0;
  for (const auto& s : specs) {
    SegmentAnnotation ann;
    ann.start_frame = cursor;
    ann.end_frame = cursor + 10;
    cursor += 10;
    ann.action = {ConceptKind::Action, s.action};
    if (s.direction) ann.direction = Concept{ConceptKind::Direction, *s.direction};
    for (const auto& p : s.parts) ann.body_parts.push_back({ConceptKind::BodyPart, p});
    ann.primary_body_part = {ConceptKind::BodyPart, s.primary};
    seq.segments.push_back(std::move(ann));
  }
  seq.frames.frame_count = cursor;
  seq.frames.data.assign(static_cast<size_t>(cursor) * kJointCount * 3, 0.f);
  return seq;
}

ConceptVocabulary fig_vocab() {
  ConceptVocabulary vocab;
  vocab.add_all(ConceptKind::Action, {"walk", "squat", "pick_up", "jump"});
  vocab.add_all(ConceptKind::Direction, {"forward", "down", "up"});
  vocab.add_all(ConceptKind::BodyPart, {"left_leg", "right_leg", "torso", "right_hand"});
  return vocab;
}

}  // namespace

TEST_CASE("render_question canonical strings") {
  CHECK(render_question(QuestionType::QueryAction, Relation::Before,
                        {{ConceptKind::Direction, "left"}}) ==
        "What action does the person do before they move left?");
  CHECK(render_question(QuestionType::QueryBodyPart, Relation::After,
                        {{ConceptKind::Action, "jump"}}) ==
        "What body part does the person use after they jump?");
  CHECK(render_question(QuestionType::QueryDirection, Relation::Between,
                        {{ConceptKind::Action, "sit"}, {ConceptKind::Action, "stand"}}) ==
        "Which direction does the person move between sitting down and standing up?");
}

TEST_CASE("render_question variants and arity") {
  const Concept jump{ConceptKind::Action, "jump"};
  const std::string v0 = render_question(QuestionType::QueryAction, std::nullopt, {jump}, 0);
  const std::string v1 = render_question(QuestionType::QueryAction, std::nullopt, {jump}, 1);
  CHECK(v0 != v1);
  CHECK(render_question(QuestionType::QueryAction, std::nullopt, {jump}, 2) == v0);
  CHECK_THROWS_AS(render_question(QuestionType::QueryAction, Relation::Between, {jump}),
                  ArityError);
}

TEST_CASE("surface forms") {
  CHECK(surface_forms({ConceptKind::Action, "squat"}).gerund == "squatting");
  CHECK(surface_forms({ConceptKind::Action, "wave"}).gerund == "waving");
  CHECK(surface_forms({ConceptKind::Action, "raise_arm"}).base == "raise their arm");
  CHECK(surface_forms({ConceptKind::Direction, "left"}).base == "move left");
  CHECK(surface_forms({ConceptKind::BodyPart, "right_hand"}).gerund == "using their right hand");
}

TEST_CASE("generate_dataset reproduces the squat-before-pick_up example") {
  auto vocab = fig_vocab();
  std::vector<MotionSequence> motions = {
      make_motion("fig4", {{"walk", std::string("forward"), {"left_leg", "right_leg"}, "left_leg"},
                           {"squat", std::string("down"), {"torso"}, "torso"},
                           {"pick_up", std::nullopt, {"right_hand"}, "right_hand"}})};
  DatasetConfig config;
  config.per_cell_quota = 10;
  config.relations = {Relation::Before};
  config.allow_underfull = true;
  DatasetManifest manifest = generate_dataset(motions, 0, config, vocab);

  const QAExample* found = nullptr;
  for (const auto& e : manifest.examples) {
    if (to_text(e.program) == "query_action(relate(before, filter_action(pick_up)))") found = &e;
  }
  REQUIRE(found != nullptr);
  CHECK(found->answer.label == "squat");
  const bool question_matches =
      found->question == "What action does the person do before they pick up?" ||
      found->question == "Which action is performed before they pick up?";
  CHECK(question_matches);
  // walk is earlier but not adjacent, so it must never be the answer
  CHECK(found->answer.label != "walk");
}

TEST_CASE("ambiguous anchors are discarded") {
  auto vocab = fig_vocab();
  // walk occurs twice with different predecessors
  std::vector<MotionSequence> motions = {
      make_motion("amb", {{"squat", std::string("down"), {"torso"}, "torso"},
                          {"walk", std::string("forward"), {"left_leg"}, "left_leg"},
                          {"jump", std::string("up"), {"left_leg"}, "left_leg"},
                          {"walk", std::string("forward"), {"left_leg"}, "left_leg"}})};
  DatasetConfig config;
  config.per_cell_quota = 50;
  config.relations = {Relation::Before};
  config.allow_underfull = true;
  DatasetManifest manifest = generate_dataset(motions, 0, config, vocab);
  for (const auto& e : manifest.examples) {
    CHECK(to_text(e.program) != "query_action(relate(before, filter_action(walk)))");
    CHECK(to_text(e.program) != "query_body_part(relate(before, filter_action(walk)))");
    CHECK(to_text(e.program) != "query_direction(relate(before, filter_action(walk)))");
  }
}

TEST_CASE("generated manifest satisfies dataset invariants") {
  auto vocab = default_vocabulary();
  MotionConfig mconfig;
  mconfig.segments_per_seq = 4;
  std::vector<MotionSequence> motions;
  std::map<std::string, MotionSequence> by_id;
  for (int i = 0; i < 200; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "m%06d", i);
    motions.push_back(generate_sequence(mix_seed(3, i), mconfig, vocab, id));
    by_id[id] = motions.back();
  }
  DatasetConfig config;
  config.per_cell_quota = 12;
  DatasetManifest manifest = generate_dataset(motions, 3, config, vocab);

  // Oracle consistency on 100% of examples.
  CHECK(verify_manifest(manifest, by_id).empty());

  // Split hygiene: motion ids are disjoint across splits.
  std::map<Split, std::set<std::string>> split_motions;
  for (const auto& e : manifest.examples) split_motions[e.split].insert(e.motion_id);
  for (const auto& m : split_motions[Split::Train]) {
    CHECK(!split_motions[Split::Val].count(m));
    CHECK(!split_motions[Split::Test].count(m));
  }
  for (const auto& m : split_motions[Split::Val]) CHECK(!split_motions[Split::Test].count(m));

  // Cell counts reported and quotas met.
  CHECK(manifest.cell_counts.size() == 12);
  for (const auto& [cell, count] : manifest.cell_counts) {
    CAPTURE(cell);
    CHECK(count == 12);
  }

  // Answer kind matches question type; programs match their question type.
  for (const auto& e : manifest.examples) {
    CHECK(e.answer.kind == answer_kind(e.question_type));
    CHECK(e.program.question_type == e.question_type);
  }

  // Every answer label occurs at least once in train (per active kind).
  for (QuestionType qtype : {QuestionType::QueryAction, QuestionType::QueryDirection,
                             QuestionType::QueryBodyPart}) {
    std::set<std::string> seen;
    for (const auto& e : manifest.examples) {
      if (e.split == Split::Train && e.question_type == qtype) seen.insert(e.answer.label);
    }
    CHECK(seen.size() == vocab.labels(answer_kind(qtype)).size());
  }
}

TEST_CASE("predict_program inverts the paper question") {
  auto vocab = default_vocabulary();
  auto pred = predict_program("What action does the person do before they move left?", vocab);
  CHECK(pred.exact);
  CHECK(to_text(pred.program) == "query_action(relate(before, filter_direction(left)))");
}

TEST_CASE("predict_program is exact on every generated question") {
  auto vocab = default_vocabulary();
  MotionConfig mconfig;
  mconfig.segments_per_seq = 4;
  std::vector<MotionSequence> motions;
  for (int i = 0; i < 60; ++i) {
    motions.push_back(generate_sequence(mix_seed(11, i), mconfig, vocab));
  }
  DatasetConfig config;
  config.per_cell_quota = 8;
  config.allow_underfull = true;
  DatasetManifest manifest = generate_dataset(motions, 11, config, vocab);
  REQUIRE(manifest.examples.size() >= 50);
  for (const auto& e : manifest.examples) {
    auto pred = predict_program(e.question, vocab);
    CAPTURE(e.question);
    CHECK(pred.exact);
    CHECK(pred.program.structurally_equal(e.program));
  }
}

TEST_CASE("predict_program rejects shuffled words") {
  auto vocab = default_vocabulary();
  CHECK_THROWS_AS(
      predict_program("person the does action what before left move they do", vocab),
      UnparsableQuestionError);
  CHECK_THROWS_AS(predict_program("completely unrelated sentence", vocab),
                  UnparsableQuestionError);
}

TEST_CASE("corrupt_program") {
  auto vocab = default_vocabulary();
  Program p = parse_program("query_action(relate(before, filter_direction(left)))", vocab);

  SUBCASE("rate 0 is the identity") {
    Program c = corrupt_program(p, 0.0, 7, vocab);
    CHECK(c.structurally_equal(p));
  }

  SUBCASE("rate 1 flips the relation and resamples the concept") {
    Program c = corrupt_program(p, 1.0, 7, vocab);
    CHECK(c.root->children[0]->func == Func::RelateAfter);
    CHECK(c.root->children[0]->children[0]->concept_arg->label != "left");
    CHECK(c.root->func == Func::QueryAction);  // query steps untouched
    // still a valid program
    CHECK_NOTHROW(parse_program(to_text(c), vocab));
  }

  SUBCASE("between corruption swaps the anchors") {
    Program b = parse_program(
        "query_direction(relate(between, filter_action(squat), filter_action(jump)))", vocab);
    Program c = corrupt_program(b, 1.0, 1, vocab);
    // both filters resampled, and the relate draw swapped the children; the
    // program shape is intact
    CHECK(c.steps.size() == 4);
    CHECK(c.root->children[0]->func == Func::RelateBetween);
  }

  SUBCASE("monte-carlo perturbation rate") {
    // between-relates swap their children, which moves steps around; use
    // before/after programs so per-step comparison detects exactly the
    // perturbed steps.
    ProgramTemplateSet templates;
    templates.relations = {std::nullopt, Relation::Before, Relation::After};
    int perturbable = 0;
    int perturbed = 0;
    for (int i = 0; i < 7000; ++i) {
      Program q = random_program(40000 + i, vocab, templates);
      Program c = corrupt_program(q, 0.1, 50000 + i, vocab);
      REQUIRE(q.steps.size() == c.steps.size());
      for (size_t s = 0; s < q.steps.size(); ++s) {
        if (is_filter(q.steps[s].func)) {
          ++perturbable;
          if (!(q.steps[s].concept_arg == c.steps[s].concept_arg)) ++perturbed;
        } else if (is_relate(q.steps[s].func)) {
          ++perturbable;
          if (q.steps[s].func != c.steps[s].func) ++perturbed;
        }
      }
    }
    REQUIRE(perturbable > 10000);
    const double fraction = static_cast<double>(perturbed) / perturbable;
    CHECK(fraction > 0.08);
    CHECK(fraction < 0.12);
  }
}

TEST_CASE("manifest save/load round-trip") {
  auto vocab = fig_vocab();
  std::vector<MotionSequence> motions = {
      make_motion("fig4", {{"walk", std::string("forward"), {"left_leg"}, "left_leg"},
                           {"squat", std::string("down"), {"torso"}, "torso"},
                           {"pick_up", std::nullopt, {"right_hand"}, "right_hand"}})};
  DatasetConfig config;
  config.per_cell_quota = 10;
  config.allow_underfull = true;
  DatasetManifest manifest = generate_dataset(motions, 5, config, vocab);
  manifest.config_hash = "cafebabe";

  const std::string path = "test_manifest.jsonl";
  save_manifest(path, manifest);
  DatasetManifest back = load_manifest(path);
  CHECK(back.seed == manifest.seed);
  CHECK(back.config_hash == "cafebabe");
  CHECK(back.vocab == manifest.vocab);
  REQUIRE(back.examples.size() == manifest.examples.size());
  for (size_t i = 0; i < back.examples.size(); ++i) {
    CHECK(back.examples[i].id == manifest.examples[i].id);
    CHECK(back.examples[i].question == manifest.examples[i].question);
    CHECK(back.examples[i].program.structurally_equal(manifest.examples[i].program));
    CHECK(back.examples[i].answer == manifest.examples[i].answer);
    CHECK(back.examples[i].split == manifest.examples[i].split);
  }
  std::remove(path.c_str());
}

TEST_CASE("import_external") {
  auto vocab = default_vocabulary();
  const std::string path = "test_external.jsonl";
  {
    std::ofstream out(path);
    out << R"x({"motion_ref":"m1","question":"What action does the person do before they move left?","program_text":"query_action(relate(before, filter(left)))","answer":"squat","split":"train"})x"
        << "\n";
    out << R"x({"motion_ref":"m2","question":"What body part does the person use after they jump?","program_text":"query_body_part(relate(after, filter_action(jump)))","answer":"torso","split":"val"})x"
        << "\n";
    out << R"x({"motion_ref":"m3","question":"Which direction does the person move while they squat?","program_text":"query_direction(filter_action(squat))","answer":"down","split":"test"})x"
        << "\n";
  }

  SUBCASE("well-formed records import") {
    ImportReport report;
    DatasetManifest m = import_external(path, vocab, &report);
    CHECK(report.imported == 3);
    CHECK(report.skipped.empty());
    REQUIRE(m.examples.size() == 3);
    CHECK(m.examples[0].question_type == QuestionType::QueryAction);
    CHECK(m.examples[1].split == Split::Val);
    CHECK(to_text(m.examples[0].program) ==
          "query_action(relate(before, filter_direction(left)))");
  }

  SUBCASE("malformed records are skipped and reported") {
    {
      std::ofstream out(path, std::ios::app);
      out << R"x({"motion_ref":"m4","question":"?","program_text":"query_action(relate(","answer":"squat","split":"train"})x"
          << "\n";
      out << R"x({"motion_ref":"m5","question":"?","program_text":"query_action(filter(left))","answer":"nosuch","split":"train"})x"
          << "\n";
    }
    ImportReport report;
    DatasetManifest m = import_external(path, vocab, &report);
    CHECK(report.imported == 3);
    REQUIRE(report.skipped.size() == 2);
    CHECK(report.skipped[0].first == 4);
    CHECK(report.skipped[1].first == 5);
    CHECK(m.examples.size() == 3);
  }

  SUBCASE("re-export then re-import is identity") {
    DatasetManifest m1 = import_external(path, vocab);
    const std::string path2 = "test_external2.jsonl";
    export_external(path2, m1);
    DatasetManifest m2 = import_external(path2, vocab);
    REQUIRE(m1.examples.size() == m2.examples.size());
    for (size_t i = 0; i < m1.examples.size(); ++i) {
      CHECK(m1.examples[i].id == m2.examples[i].id);
      CHECK(m1.examples[i].motion_id == m2.examples[i].motion_id);
      CHECK(m1.examples[i].question == m2.examples[i].question);
      CHECK(m1.examples[i].program.structurally_equal(m2.examples[i].program));
      CHECK(m1.examples[i].answer == m2.examples[i].answer);
      CHECK(m1.examples[i].split == m2.examples[i].split);
    }
    std::remove(path2.c_str());
  }

  CHECK_THROWS_AS(import_external("no_such_external.jsonl", vocab), IoError);
  std::remove(path.c_str());
}

TEST_CASE("quota errors report achieved counts") {
  auto vocab = fig_vocab();
  std::vector<MotionSequence> motions = {
      make_motion("tiny", {{"walk", std::string("forward"), {"left_leg"}, "left_leg"},
                           {"squat", std::string("down"), {"torso"}, "torso"}})};
  DatasetConfig config;
  config.per_cell_quota = 500;
  CHECK_THROWS_AS(generate_dataset(motions, 0, config, vocab), QuotaUnreachableError);
  try {
    generate_dataset(motions, 0, config, vocab);
  } catch (const QuotaUnreachableError& e) {
    CHECK(std::string(e.what()).find("wanted 500") != std::string::npos);
  }
}

TEST_CASE("cell overrides can zero a cell") {
  auto vocab = default_vocabulary();
  MotionConfig mconfig;
  mconfig.segments_per_seq = 4;
  std::vector<MotionSequence> motions;
  for (int i = 0; i < 40; ++i) motions.push_back(generate_sequence(mix_seed(21, i), mconfig, vocab));
  DatasetConfig config;
  config.per_cell_quota = 4;
  config.cell_overrides["query_direction.between"] = 0;
  config.allow_underfull = true;
  DatasetManifest manifest = generate_dataset(motions, 21, config, vocab);
  CHECK(manifest.cell_counts.at("query_direction.between") == 0);
  for (const auto& e : manifest.examples) {
    if (e.question_type == QuestionType::QueryDirection) {
      CHECK(e.question.find("between") == std::string::npos);
    }
  }
}
