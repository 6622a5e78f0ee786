// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#include "imore/concepts.hpp"

#include <algorithm>

#include "imore/errors.hpp"

namespace imore {

const char* to_string(ConceptKind kind) {
  switch (kind) {
    case ConceptKind::Action: return "action";
    case ConceptKind::Direction: return "direction";
    case ConceptKind::BodyPart: return "body_part";
  }
  return "?";
}

std::vector<std::string>& ConceptVocabulary::mutable_labels(ConceptKind kind) {
  switch (kind) {
    case ConceptKind::Action: return actions_;
    case ConceptKind::Direction: return directions_;
    case ConceptKind::BodyPart: return body_parts_;
  }
  return actions_;
}

void ConceptVocabulary::add(ConceptKind kind, const std::string& label) {
  auto& v = mutable_labels(kind);
  if (std::find(v.begin(), v.end(), label) == v.end()) v.push_back(label);
}

void ConceptVocabulary::add_all(ConceptKind kind, const std::vector<std::string>& labels) {
  for (const auto& l : labels) add(kind, l);
}

bool ConceptVocabulary::contains(ConceptKind kind, const std::string& label) const {
  const auto& v = labels(kind);
  return std::find(v.begin(), v.end(), label) != v.end();
}

const std::vector<std::string>& ConceptVocabulary::labels(ConceptKind kind) const {
  switch (kind) {
    case ConceptKind::Action: return actions_;
    case ConceptKind::Direction: return directions_;
    case ConceptKind::BodyPart: return body_parts_;
  }
  return actions_;
}

std::vector<ConceptKind> ConceptVocabulary::kinds_of(const std::string& label) const {
  std::vector<ConceptKind> out;
  for (ConceptKind k : {ConceptKind::Action, ConceptKind::Direction, ConceptKind::BodyPart}) {
    if (contains(k, label)) out.push_back(k);
  }
  return out;
}

Concept ConceptVocabulary::make(ConceptKind kind, const std::string& label) const {
  if (!contains(kind, label)) {
    throw UnknownConceptError("unknown " + std::string(to_string(kind)) + " concept: " + label);
  }
  return Concept{kind, label};
}

int ConceptVocabulary::index_of(ConceptKind kind, const std::string& label) const {
  const auto& v = labels(kind);
  auto it = std::find(v.begin(), v.end(), label);
  if (it == v.end()) {
    throw UnknownConceptError("unknown " + std::string(to_string(kind)) + " concept: " + label);
  }
  return static_cast<int>(it - v.begin());
}

ConceptVocabulary default_vocabulary() {
  ConceptVocabulary vocab;
  vocab.add_all(ConceptKind::Action,
                {"raise_arm", "kick", "step", "squat", "wave", "turn", "jump", "crawl"});
  vocab.add_all(ConceptKind::Direction, {"left", "right", "forward", "backward", "up", "down"});
  vocab.add_all(ConceptKind::BodyPart,
                {"left_arm", "right_arm", "left_hand", "right_hand", "left_leg", "right_leg",
                 "left_foot", "right_foot", "torso", "head"});
  return vocab;
}

}  // namespace imore
