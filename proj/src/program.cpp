// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#include "imore/program.hpp"

#include <cctype>
#include <sstream>

#include "imore/errors.hpp"
#include "imore/rng.hpp"

namespace imore {

const char* to_string(Relation relation) {
  switch (relation) {
    case Relation::Before: return "before";
    case Relation::After: return "after";
    case Relation::Between: return "between";
  }
  return "?";
}

const char* to_string(QuestionType qtype) {
  switch (qtype) {
    case QuestionType::QueryAction: return "query_action";
    case QuestionType::QueryDirection: return "query_direction";
    case QuestionType::QueryBodyPart: return "query_body_part";
  }
  return "?";
}

QuestionType question_type_from_string(const std::string& name) {
  if (name == "query_action") return QuestionType::QueryAction;
  if (name == "query_direction") return QuestionType::QueryDirection;
  if (name == "query_body_part") return QuestionType::QueryBodyPart;
  throw SchemaError("unknown question type: " + name);
}

ConceptKind answer_kind(QuestionType qtype) {
  switch (qtype) {
    case QuestionType::QueryAction: return ConceptKind::Action;
    case QuestionType::QueryDirection: return ConceptKind::Direction;
    case QuestionType::QueryBodyPart: return ConceptKind::BodyPart;
  }
  return ConceptKind::Action;
}

const char* func_name(Func func) {
  switch (func) {
    case Func::FilterAction: return "filter_action";
    case Func::FilterDirection: return "filter_direction";
    case Func::FilterBodyPart: return "filter_body_part";
    case Func::RelateBefore:
    case Func::RelateAfter:
    case Func::RelateBetween: return "relate";
    case Func::QueryAction: return "query_action";
    case Func::QueryDirection: return "query_direction";
    case Func::QueryBodyPart: return "query_body_part";
  }
  return "?";
}

bool is_filter(Func func) {
  return func == Func::FilterAction || func == Func::FilterDirection ||
         func == Func::FilterBodyPart;
}

bool is_relate(Func func) {
  return func == Func::RelateBefore || func == Func::RelateAfter || func == Func::RelateBetween;
}

bool is_query(Func func) {
  return func == Func::QueryAction || func == Func::QueryDirection ||
         func == Func::QueryBodyPart;
}

int func_arity(Func func) {
  if (is_filter(func)) return 0;
  if (func == Func::RelateBetween) return 2;
  return 1;
}

Func filter_func(ConceptKind kind) {
  switch (kind) {
    case ConceptKind::Action: return Func::FilterAction;
    case ConceptKind::Direction: return Func::FilterDirection;
    case ConceptKind::BodyPart: return Func::FilterBodyPart;
  }
  return Func::FilterAction;
}

Func relate_func(Relation relation) {
  switch (relation) {
    case Relation::Before: return Func::RelateBefore;
    case Relation::After: return Func::RelateAfter;
    case Relation::Between: return Func::RelateBetween;
  }
  return Func::RelateBefore;
}

Func query_func(QuestionType qtype) {
  switch (qtype) {
    case QuestionType::QueryAction: return Func::QueryAction;
    case QuestionType::QueryDirection: return Func::QueryDirection;
    case QuestionType::QueryBodyPart: return Func::QueryBodyPart;
  }
  return Func::QueryAction;
}

Relation relation_of(Func func) {
  switch (func) {
    case Func::RelateBefore: return Relation::Before;
    case Func::RelateAfter: return Relation::After;
    case Func::RelateBetween: return Relation::Between;
    default: throw ArityError("not a relate function");
  }
}

ConceptKind filter_kind(Func func) {
  switch (func) {
    case Func::FilterAction: return ConceptKind::Action;
    case Func::FilterDirection: return ConceptKind::Direction;
    case Func::FilterBodyPart: return ConceptKind::BodyPart;
    default: throw ArityError("not a filter function");
  }
}

ProgramNodePtr ProgramNode::clone() const {
  auto node = std::make_unique<ProgramNode>();
  node->func = func;
  node->concept_arg = concept_arg;
  node->children.reserve(children.size());
  for (const auto& c : children) node->children.push_back(c->clone());
  return node;
}

ProgramNodePtr make_filter(const Concept& concept_arg) {
  auto node = std::make_unique<ProgramNode>();
  node->func = filter_func(concept_arg.kind);
  node->concept_arg = concept_arg;
  return node;
}

ProgramNodePtr make_relate(Relation relation, std::vector<ProgramNodePtr> args) {
  auto node = std::make_unique<ProgramNode>();
  node->func = relate_func(relation);
  node->children = std::move(args);
  if (static_cast<int>(node->children.size()) != func_arity(node->func)) {
    throw ArityError(std::string("relate(") + to_string(relation) + ") takes " +
                     std::to_string(func_arity(node->func)) + " argument(s)");
  }
  return node;
}

ProgramNodePtr make_query(QuestionType qtype, ProgramNodePtr child) {
  auto node = std::make_unique<ProgramNode>();
  node->func = query_func(qtype);
  node->children.push_back(std::move(child));
  return node;
}

namespace {

void validate_node(const ProgramNode& node, bool is_root) {
  if (is_query(node.func) && !is_root) {
    throw SyntaxError("query functions are only valid at the program root");
  }
  if (is_filter(node.func)) {
    if (!node.children.empty()) throw ArityError("filter nodes are leaves");
    if (!node.concept_arg) throw SyntaxError("filter node without concept");
    if (node.concept_arg->kind != filter_kind(node.func)) {
      throw SyntaxError("filter concept kind mismatch");
    }
    return;
  }
  if (node.concept_arg) throw SyntaxError("only filter nodes carry concepts");
  if (static_cast<int>(node.children.size()) != func_arity(node.func)) {
    throw ArityError(std::string(func_name(node.func)) + " expects " +
                     std::to_string(func_arity(node.func)) + " argument(s), got " +
                     std::to_string(node.children.size()));
  }
  for (const auto& c : node.children) validate_node(*c, false);
}

}  // namespace

void validate_ast(const ProgramNode& root) {
  if (!is_query(root.func)) throw SyntaxError("program root must be a query function");
  validate_node(root, true);
  // Root query has one child, so depth >= 2 holds by arity.
}

namespace {

void linearize_into(const ProgramNode& node, std::vector<ProgramStep>& steps) {
  std::vector<int> deps;
  deps.reserve(node.children.size());
  for (const auto& c : node.children) {
    linearize_into(*c, steps);
    deps.push_back(steps.back().index);
  }
  ProgramStep step;
  step.index = static_cast<int>(steps.size());
  step.func = node.func;
  step.concept_arg = node.concept_arg;
  step.deps = std::move(deps);
  steps.push_back(std::move(step));
}

}  // namespace

std::vector<ProgramStep> linearize(const ProgramNode& root) {
  std::vector<ProgramStep> steps;
  linearize_into(root, steps);
  return steps;
}

Program::Program(ProgramNodePtr r) {
  validate_ast(*r);
  root = std::move(r);
  steps = linearize(*root);
  switch (root->func) {
    case Func::QueryAction: question_type = QuestionType::QueryAction; break;
    case Func::QueryDirection: question_type = QuestionType::QueryDirection; break;
    case Func::QueryBodyPart: question_type = QuestionType::QueryBodyPart; break;
    default: throw SyntaxError("program root must be a query function");
  }
}

Program::Program(const Program& other) {
  root = other.root ? other.root->clone() : nullptr;
  steps = other.steps;
  question_type = other.question_type;
}

Program& Program::operator=(const Program& other) {
  if (this != &other) {
    root = other.root ? other.root->clone() : nullptr;
    steps = other.steps;
    question_type = other.question_type;
  }
  return *this;
}

bool nodes_equal(const ProgramNode& a, const ProgramNode& b) {
  if (a.func != b.func || a.concept_arg != b.concept_arg) return false;
  if (a.children.size() != b.children.size()) return false;
  for (size_t i = 0; i < a.children.size(); ++i) {
    if (!nodes_equal(*a.children[i], *b.children[i])) return false;
  }
  return true;
}

bool Program::structurally_equal(const Program& other) const {
  if (!root || !other.root) return root == other.root;
  return nodes_equal(*root, *other.root);
}

std::string to_text(const ProgramNode& node) {
  std::ostringstream out;
  if (is_filter(node.func)) {
    out << func_name(node.func) << '(' << node.concept_arg->label << ')';
    return out.str();
  }
  out << func_name(node.func) << '(';
  if (is_relate(node.func)) {
    out << to_string(relation_of(node.func));
    for (const auto& c : node.children) out << ", " << to_text(*c);
  } else {
    for (size_t i = 0; i < node.children.size(); ++i) {
      if (i) out << ", ";
      out << to_text(*node.children[i]);
    }
  }
  out << ')';
  return out.str();
}

std::string to_text(const Program& program) { return to_text(*program.root); }

namespace {

struct Token {
  enum Kind { Ident, LParen, RParen, Comma, End } kind;
  std::string text;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ >= text_.size()) return {Token::End, ""};
    const char c = text_[pos_];
    if (c == '(') { ++pos_; return {Token::LParen, "("}; }
    if (c == ')') { ++pos_; return {Token::RParen, ")"}; }
    if (c == ',') { ++pos_; return {Token::Comma, ","}; }
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      return {Token::Ident, text_.substr(start, pos_ - start)};
    }
    throw SyntaxError(std::string("unexpected character '") + c + "' at offset " +
                      std::to_string(pos_));
  }

 private:
  const std::string& text_;
  size_t pos_ = 0;
};

class Parser {
 public:
  Parser(const std::string& text, const ConceptVocabulary& vocab)
      : lexer_(text), vocab_(vocab) {
    advance();
  }

  Program parse() {
    auto root = parse_call(true);
    expect(Token::End, "trailing input after program");
    return Program(std::move(root));
  }

 private:
  void advance() { current_ = lexer_.next(); }

  void expect(Token::Kind kind, const char* what) {
    if (current_.kind != kind) throw SyntaxError(what);
    advance();
  }

  Concept resolve_concept(ConceptKind kind, const std::string& label) {
    return vocab_.make(kind, label);
  }

  Concept resolve_bare(const std::string& label) {
    auto kinds = vocab_.kinds_of(label);
    if (kinds.empty()) throw UnknownConceptError("unknown concept: " + label);
    if (kinds.size() > 1) {
      throw AmbiguousConceptError("concept '" + label +
                                  "' is in multiple vocabularies; use a typed filter");
    }
    return Concept{kinds[0], label};
  }

  std::string take_ident(const char* what) {
    if (current_.kind != Token::Ident) throw SyntaxError(what);
    std::string s = current_.text;
    advance();
    return s;
  }

  ProgramNodePtr parse_call(bool is_root) {
    const std::string name = take_ident("expected a function name");
    expect(Token::LParen, "expected '('");
    ProgramNodePtr node;
    if (name == "filter" || name == "filter_action" || name == "filter_direction" ||
        name == "filter_body_part") {
      const std::string label = take_ident("expected a concept label");
      Concept concept_arg = name == "filter" ? resolve_bare(label)
                        : name == "filter_action" ? resolve_concept(ConceptKind::Action, label)
                        : name == "filter_direction"
                            ? resolve_concept(ConceptKind::Direction, label)
                            : resolve_concept(ConceptKind::BodyPart, label);
      node = make_filter(concept_arg);
    } else if (name == "relate") {
      const std::string rel = take_ident("expected a relation name");
      Relation relation;
      if (rel == "before") relation = Relation::Before;
      else if (rel == "after") relation = Relation::After;
      else if (rel == "between") relation = Relation::Between;
      else throw SyntaxError("unknown relation: " + rel);
      std::vector<ProgramNodePtr> args;
      while (current_.kind == Token::Comma) {
        advance();
        args.push_back(parse_call(false));
      }
      if (static_cast<int>(args.size()) != func_arity(relate_func(relation))) {
        throw ArityError(std::string("relate(") + rel + ") takes " +
                         std::to_string(func_arity(relate_func(relation))) +
                         " argument(s), got " + std::to_string(args.size()));
      }
      node = make_relate(relation, std::move(args));
    } else if (name == "query_action" || name == "query_direction" || name == "query_body_part") {
      if (!is_root) throw SyntaxError("query functions are only valid at the program root");
      auto child = parse_call(false);
      if (current_.kind == Token::Comma) throw ArityError(name + " takes 1 argument");
      QuestionType qtype = question_type_from_string(name);
      node = make_query(qtype, std::move(child));
    } else {
      throw SyntaxError("unknown function: " + name);
    }
    expect(Token::RParen, "expected ')'");
    return node;
  }

  Lexer lexer_;
  const ConceptVocabulary& vocab_;
  Token current_;
};

}  // namespace

Program parse_program(const std::string& text, const ConceptVocabulary& vocab) {
  if (text.empty()) throw SyntaxError("empty program text");
  Parser parser(text, vocab);
  return parser.parse();
}

Program random_program(std::uint64_t rng_seed, const ConceptVocabulary& vocab,
                       const ProgramTemplateSet& templates) {
  if (templates.question_types.empty() || templates.relations.empty() ||
      templates.filter_kinds.empty()) {
    throw ConfigError("empty program template set");
  }
  for (ConceptKind k : templates.filter_kinds) {
    if (vocab.empty(k)) {
      throw EmptyVocabularyError(std::string("empty vocabulary for kind ") + to_string(k));
    }
  }
  Rng rng(rng_seed);
  const QuestionType qtype =
      templates.question_types[rng.below(templates.question_types.size())];
  const auto relation = templates.relations[rng.below(templates.relations.size())];

  auto draw_filter = [&]() {
    const ConceptKind kind = templates.filter_kinds[rng.below(templates.filter_kinds.size())];
    const auto& labels = vocab.labels(kind);
    return make_filter(Concept{kind, labels[rng.below(labels.size())]});
  };

  ProgramNodePtr body;
  if (!relation.has_value()) {
    body = draw_filter();
  } else if (*relation == Relation::Between) {
    std::vector<ProgramNodePtr> args;
    args.push_back(draw_filter());
    args.push_back(draw_filter());
    body = make_relate(Relation::Between, std::move(args));
  } else {
    std::vector<ProgramNodePtr> args;
    args.push_back(draw_filter());
    body = make_relate(*relation, std::move(args));
  }
  return Program(make_query(qtype, std::move(body)));
}

}  // namespace imore
