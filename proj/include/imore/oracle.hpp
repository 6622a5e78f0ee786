// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef IMORE_ORACLE_HPP
#define IMORE_ORACLE_HPP

#include <optional>
#include <string>
#include <vector>

#include "imore/motion.hpp"
#include "imore/program.hpp"

namespace imore {

/// Sorted, deduplicated segment indices into a MotionSequence.
using SegmentSet = std::vector<int>;

enum class ExecStatus { Ok, EmptyResult, AmbiguousResult, MissingAttribute };
const char* to_string(ExecStatus status);

/// Segments whose annotation matches the concept. Action and direction match
/// by equality, body parts by membership.
SegmentSet exec_filter(const MotionSequence& motion, ConceptKind kind, const Concept& concept_arg);

/// Before/After move to immediate neighbours; out-of-range members drop out.
/// Between returns the segments strictly inside the earliest qualifying
/// (last-of-A-before-B, B) pair.
SegmentSet exec_relate(const MotionSequence& motion, Relation relation,
                       const std::vector<SegmentSet>& args);

struct QueryResult {
  ExecStatus status = ExecStatus::Ok;
  std::optional<Concept> answer;
};

/// Reads the queried attribute off the unique segment in `set`.
QueryResult exec_query(const MotionSequence& motion, QuestionType qtype, const SegmentSet& set);

struct StepTrace {
  Func func;
  std::optional<Concept> concept_arg;
  SegmentSet out;  // for the query step: the set it consumed
};

struct ExecResult {
  ExecStatus status = ExecStatus::Ok;
  std::optional<Concept> answer;
  std::vector<StepTrace> steps;  // exactly program.length() entries

  bool ok() const { return status == ExecStatus::Ok; }
};

/// Executes the linearized program over the annotations, recording every
/// intermediate segment set. Empty/ambiguous results are statuses, not errors.
ExecResult execute(const MotionSequence& motion, const Program& program);

/// Structured-text trace: one line per step "index func(concept) -> {i,j}".
std::string format_trace(const ExecResult& result);

}  // namespace imore

#endif
