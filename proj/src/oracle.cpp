// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#include "imore/oracle.hpp"

#include <algorithm>
#include <sstream>

#include "imore/errors.hpp"

namespace imore {

const char* to_string(ExecStatus status) {
  switch (status) {
    case ExecStatus::Ok: return "ok";
    case ExecStatus::EmptyResult: return "empty_result";
    case ExecStatus::AmbiguousResult: return "ambiguous_result";
    case ExecStatus::MissingAttribute: return "missing_attribute";
  }
  return "?";
}

SegmentSet exec_filter(const MotionSequence& motion, ConceptKind kind,
                       const Concept& concept_arg) {
  if (concept_arg.kind != kind) throw ArityError("filter kind does not match concept kind");
  SegmentSet out;
  for (int i = 0; i < static_cast<int>(motion.segments.size()); ++i) {
    const auto& seg = motion.segments[i];
    bool match = false;
    switch (kind) {
      case ConceptKind::Action:
        match = seg.action.label == concept_arg.label;
        break;
      case ConceptKind::Direction:
        match = seg.direction && seg.direction->label == concept_arg.label;
        break;
      case ConceptKind::BodyPart:
        match = std::any_of(seg.body_parts.begin(), seg.body_parts.end(),
                            [&](const Concept& bp) { return bp.label == concept_arg.label; });
        break;
    }
    if (match) out.push_back(i);
  }
  return out;
}

SegmentSet exec_relate(const MotionSequence& motion, Relation relation,
                       const std::vector<SegmentSet>& args) {
  const int n = static_cast<int>(motion.segments.size());
  if (relation == Relation::Between) {
    if (args.size() != 2) throw ArityError("relate(between) takes two segment sets");
    // Earliest member of B that has some member of A before it; the gap
    // between the closest such A member and it.
    const SegmentSet& a = args[0];
    const SegmentSet& b = args[1];
    for (int j : b) {
      int best_a = -1;
      for (int i : a) {
        if (i < j) best_a = std::max(best_a, i);
      }
      if (best_a >= 0) {
        SegmentSet out;
        for (int k = best_a + 1; k < j; ++k) out.push_back(k);
        return out;
      }
    }
    return {};
  }
  if (args.size() != 1) throw ArityError("relate(before/after) takes one segment set");
  SegmentSet out;
  for (int i : args[0]) {
    const int k = relation == Relation::Before ? i - 1 : i + 1;
    if (k >= 0 && k < n) out.push_back(k);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

QueryResult exec_query(const MotionSequence& motion, QuestionType qtype, const SegmentSet& set) {
  if (set.empty()) return {ExecStatus::EmptyResult, std::nullopt};
  if (set.size() > 1) return {ExecStatus::AmbiguousResult, std::nullopt};
  const auto& seg = motion.segments.at(set[0]);
  switch (qtype) {
    case QuestionType::QueryAction:
      return {ExecStatus::Ok, seg.action};
    case QuestionType::QueryDirection:
      if (!seg.direction) return {ExecStatus::MissingAttribute, std::nullopt};
      return {ExecStatus::Ok, *seg.direction};
    case QuestionType::QueryBodyPart:
      return {ExecStatus::Ok, seg.primary_body_part};
  }
  return {ExecStatus::EmptyResult, std::nullopt};
}

ExecResult execute(const MotionSequence& motion, const Program& program) {
  ExecResult result;
  std::vector<SegmentSet> values(program.steps.size());
  for (const auto& step : program.steps) {
    StepTrace trace{step.func, step.concept_arg, {}};
    if (is_filter(step.func)) {
      values[step.index] = exec_filter(motion, filter_kind(step.func), *step.concept_arg);
      trace.out = values[step.index];
    } else if (is_relate(step.func)) {
      std::vector<SegmentSet> args;
      for (int d : step.deps) args.push_back(values[d]);
      values[step.index] = exec_relate(motion, relation_of(step.func), args);
      trace.out = values[step.index];
    } else {
      const SegmentSet& in = values.at(step.deps.at(0));
      trace.out = in;
      QueryResult q = exec_query(motion, program.question_type, in);
      result.status = q.status;
      result.answer = q.answer;
    }
    result.steps.push_back(std::move(trace));
  }
  return result;
}

std::string format_trace(const ExecResult& result) {
  std::ostringstream out;
  for (size_t i = 0; i < result.steps.size(); ++i) {
    const auto& s = result.steps[i];
    out << i << ' ' << func_name(s.func);
    if (is_relate(s.func)) out << '[' << to_string(relation_of(s.func)) << ']';
    if (s.concept_arg) out << '(' << s.concept_arg->label << ')';
    out << " -> {";
    for (size_t k = 0; k < s.out.size(); ++k) {
      if (k) out << ',';
      out << s.out[k];
    }
    out << "}\n";
  }
  out << "status " << to_string(result.status);
  if (result.answer) out << " answer " << result.answer->label;
  out << "\n";
  return out.str();
}

}  // namespace imore
