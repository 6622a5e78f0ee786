// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef IMORE_PROGRAM_HPP
#define IMORE_PROGRAM_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "imore/concepts.hpp"

namespace imore {

enum class Relation { Before, After, Between };
enum class QuestionType { QueryAction, QueryDirection, QueryBodyPart };

const char* to_string(Relation relation);
const char* to_string(QuestionType qtype);
QuestionType question_type_from_string(const std::string& name);
ConceptKind answer_kind(QuestionType qtype);

/// DSL function kinds. Relate is split per relation so a linearized step is a
/// single (func, concept_arg, deps) record.
enum class Func {
  FilterAction,
  FilterDirection,
  FilterBodyPart,
  RelateBefore,
  RelateAfter,
  RelateBetween,
  QueryAction,
  QueryDirection,
  QueryBodyPart,
};

constexpr int kFuncCount = 9;
const char* func_name(Func func);
bool is_filter(Func func);
bool is_relate(Func func);
bool is_query(Func func);
int func_arity(Func func);
Func filter_func(ConceptKind kind);
Func relate_func(Relation relation);
Func query_func(QuestionType qtype);
Relation relation_of(Func func);
ConceptKind filter_kind(Func func);

struct ProgramNode;
using ProgramNodePtr = std::unique_ptr<ProgramNode>;

struct ProgramNode {
  Func func;
  std::optional<Concept> concept_arg;   // filters only
  std::vector<ProgramNodePtr> children;

  ProgramNodePtr clone() const;
};

ProgramNodePtr make_filter(const Concept& concept_arg);
ProgramNodePtr make_relate(Relation relation, std::vector<ProgramNodePtr> args);
ProgramNodePtr make_query(QuestionType qtype, ProgramNodePtr child);

/// Structural validation of an AST (root is a query, arities, filters are
/// leaves, depth >= 2). Throws ArityError / SyntaxError on violation.
void validate_ast(const ProgramNode& root);

/// One linearized node: deps are the post-order indices of its children.
struct ProgramStep {
  int index = 0;
  Func func = Func::QueryAction;
  std::optional<Concept> concept_arg;
  std::vector<int> deps;

  bool operator==(const ProgramStep&) const = default;
};

std::vector<ProgramStep> linearize(const ProgramNode& root);

struct Program {
  ProgramNodePtr root;
  std::vector<ProgramStep> steps;   // post-order, length p
  QuestionType question_type = QuestionType::QueryAction;

  Program() = default;
  explicit Program(ProgramNodePtr r);
  Program(const Program& other);
  Program& operator=(const Program& other);
  Program(Program&&) = default;
  Program& operator=(Program&&) = default;

  int length() const { return static_cast<int>(steps.size()); }
  bool structurally_equal(const Program& other) const;
};

bool nodes_equal(const ProgramNode& a, const ProgramNode& b);

/// Canonical text: lowercase functions, typed filters, comma-space args.
std::string to_text(const ProgramNode& node);
std::string to_text(const Program& program);

/// Parser for the canonical syntax; accepts bare `filter(x)` sugar, resolved
/// against the vocabulary. Throws SyntaxError / UnknownConceptError /
/// AmbiguousConceptError / ArityError.
Program parse_program(const std::string& text, const ConceptVocabulary& vocab);

/// Grammar cells random programs (and generated questions) are drawn from.
struct ProgramTemplateSet {
  std::vector<QuestionType> question_types{QuestionType::QueryAction,
                                           QuestionType::QueryDirection,
                                           QuestionType::QueryBodyPart};
  // nullopt = plain filter question with no relate step.
  std::vector<std::optional<Relation>> relations{std::nullopt, Relation::Before,
                                                 Relation::After, Relation::Between};
  std::vector<ConceptKind> filter_kinds{ConceptKind::Action, ConceptKind::Direction,
                                        ConceptKind::BodyPart};
};

Program random_program(std::uint64_t rng_seed, const ConceptVocabulary& vocab,
                       const ProgramTemplateSet& templates = {});

}  // namespace imore

#endif
