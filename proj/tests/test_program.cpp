// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "imore/errors.hpp"
#include "imore/program.hpp"

using namespace imore;

TEST_CASE("parse the canonical before-program") {
  auto vocab = default_vocabulary();
  Program p = parse_program("query_action(relate(before, filter(left)))", vocab);
  CHECK(p.question_type == QuestionType::QueryAction);
  CHECK(p.length() == 3);
  CHECK(p.root->func == Func::QueryAction);
  const ProgramNode& relate = *p.root->children[0];
  CHECK(relate.func == Func::RelateBefore);
  const ProgramNode& filter = *relate.children[0];
  CHECK(filter.func == Func::FilterDirection);  // bare filter(left) unsugars by vocab
  CHECK(filter.concept_arg->label == "left");
}

TEST_CASE("parse a minimal two-node program") {
  auto vocab = default_vocabulary();
  Program p = parse_program("query_body_part(filter_action(jump))", vocab);
  CHECK(p.question_type == QuestionType::QueryBodyPart);
  CHECK(p.length() == 2);
  CHECK(p.root->children[0]->func == Func::FilterAction);
  CHECK(p.root->children[0]->concept_arg->label == "jump");
}

TEST_CASE("parse errors") {
  auto vocab = default_vocabulary();
  CHECK_THROWS_AS(parse_program("query_action(relate(before, filter(nosuch)))", vocab),
                  UnknownConceptError);
  CHECK_THROWS_AS(parse_program("query_action(relate(before, filter(left))", vocab), SyntaxError);
  CHECK_THROWS_AS(parse_program("mystery(filter(left))", vocab), SyntaxError);
  CHECK_THROWS_AS(parse_program("", vocab), SyntaxError);
  CHECK_THROWS_AS(parse_program("query_action(filter(left)) extra", vocab), SyntaxError);
  // before takes one argument, between takes two
  CHECK_THROWS_AS(
      parse_program("query_action(relate(before, filter(left), filter(right)))", vocab),
      ArityError);
  CHECK_THROWS_AS(parse_program("query_action(relate(between, filter(left)))", vocab), ArityError);
  CHECK_THROWS_AS(parse_program("query_action(relate(sideways, filter(left)))", vocab),
                  SyntaxError);
  // filter label present in two vocabularies is ambiguous when bare
  ConceptVocabulary clash;
  clash.add(ConceptKind::Action, "spin");
  clash.add(ConceptKind::Direction, "spin");
  CHECK_THROWS_AS(parse_program("query_action(filter(spin))", clash), AmbiguousConceptError);
  CHECK_NOTHROW(parse_program("query_direction(filter_action(spin))", clash));
}

TEST_CASE("to_text canonicalizes the paper examples") {
  auto vocab = default_vocabulary();
  Program p = parse_program("query_action(relate(before, filter(left)))", vocab);
  CHECK(to_text(p) == "query_action(relate(before, filter_direction(left)))");

  Program q = parse_program("query_body_part(filter_action(crawl))", vocab);
  CHECK(to_text(q) == "query_body_part(filter_action(crawl))");
}

TEST_CASE("linearize produces post-order steps with child deps") {
  auto vocab = default_vocabulary();

  SUBCASE("three-step before-program") {
    Program p = parse_program("query_action(relate(before, filter(left)))", vocab);
    REQUIRE(p.steps.size() == 3);
    CHECK(p.steps[0].func == Func::FilterDirection);
    CHECK(p.steps[0].concept_arg->label == "left");
    CHECK(p.steps[0].deps.empty());
    CHECK(p.steps[1].func == Func::RelateBefore);
    CHECK(p.steps[1].deps == std::vector<int>{0});
    CHECK(p.steps[2].func == Func::QueryAction);
    CHECK(p.steps[2].deps == std::vector<int>{1});
  }

  SUBCASE("single-filter query has two steps") {
    Program p = parse_program("query_direction(filter_action(jump))", vocab);
    REQUIRE(p.steps.size() == 2);
    CHECK(p.steps[1].deps == std::vector<int>{0});
  }

  SUBCASE("between-program has four steps, relate deps [0,1]") {
    Program p = parse_program(
        "query_action(relate(between, filter_action(squat), filter_action(jump)))", vocab);
    REQUIRE(p.steps.size() == 4);
    CHECK(p.steps[0].func == Func::FilterAction);
    CHECK(p.steps[1].func == Func::FilterAction);
    CHECK(p.steps[2].func == Func::RelateBetween);
    CHECK(p.steps[2].deps == std::vector<int>{0, 1});
    CHECK(p.steps[3].func == Func::QueryAction);
    CHECK(p.steps[3].deps == std::vector<int>{2});
  }
}

static void check_program_invariants(const Program& p) {
  REQUIRE(p.root != nullptr);
  CHECK(is_query(p.root->func));
  CHECK(p.question_type == question_type_from_string(func_name(p.root->func)));
  REQUIRE(p.steps.size() >= 2);
  // Step list is the post-order linearization; deps strictly precede.
  auto relinearized = linearize(*p.root);
  CHECK(relinearized == p.steps);
  int parentless = 0;
  std::vector<int> referenced(p.steps.size(), 0);
  for (const auto& step : p.steps) {
    for (int d : step.deps) {
      CHECK(d < step.index);
      CHECK(d >= 0);
      referenced[d] += 1;
    }
  }
  for (const auto& step : p.steps) {
    if (referenced[step.index] == 0) ++parentless;
    CHECK(referenced[step.index] <= 1);  // dependency graph is a tree
  }
  CHECK(parentless == 1);
  CHECK(p.steps.back().func == query_func(p.question_type));
}

TEST_CASE("round-trip property over 1000 random programs") {
  auto vocab = default_vocabulary();
  for (int i = 0; i < 1000; ++i) {
    Program p = random_program(1234 + i, vocab);
    check_program_invariants(p);
    Program q = parse_program(to_text(p), vocab);
    CHECK(p.structurally_equal(q));
    CHECK(to_text(q) == to_text(p));
  }
}

TEST_CASE("random_program determinism and restriction") {
  auto vocab = default_vocabulary();
  Program a = random_program(0, vocab);
  Program b = random_program(0, vocab);
  CHECK(a.structurally_equal(b));

  ProgramTemplateSet only_before;
  only_before.question_types = {QuestionType::QueryAction};
  only_before.relations = {Relation::Before};
  for (int i = 0; i < 50; ++i) {
    Program p = random_program(i, vocab, only_before);
    CHECK(p.root->func == Func::QueryAction);
    CHECK(p.root->children[0]->func == Func::RelateBefore);
  }
}

TEST_CASE("random_program rejects empty vocabularies") {
  ConceptVocabulary empty;
  CHECK_THROWS_AS(random_program(0, empty), EmptyVocabularyError);
}
