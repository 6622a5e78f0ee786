// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef IMORE_CONCEPTS_HPP
#define IMORE_CONCEPTS_HPP

#include <optional>
#include <string>
#include <vector>

namespace imore {

enum class ConceptKind { Action, Direction, BodyPart };

const char* to_string(ConceptKind kind);

/// A vocabulary member of one answer kind, e.g. Action:"squat" or
/// Direction:"left".
struct Concept {
  ConceptKind kind;
  std::string label;

  bool operator==(const Concept&) const = default;
};

/// Registered labels per concept kind. Concepts are only valid against a
/// vocabulary; bare `filter(x)` sugar resolves through it.
class ConceptVocabulary {
 public:
  ConceptVocabulary() = default;

  void add(ConceptKind kind, const std::string& label);
  void add_all(ConceptKind kind, const std::vector<std::string>& labels);

  bool contains(ConceptKind kind, const std::string& label) const;
  const std::vector<std::string>& labels(ConceptKind kind) const;

  /// All kinds whose vocabulary contains `label` (for sugar resolution).
  std::vector<ConceptKind> kinds_of(const std::string& label) const;

  /// Validates membership; throws UnknownConceptError.
  Concept make(ConceptKind kind, const std::string& label) const;

  /// Index of a label within its kind's vocabulary (embedding ids, answers).
  int index_of(ConceptKind kind, const std::string& label) const;

  bool empty(ConceptKind kind) const { return labels(kind).empty(); }

  bool operator==(const ConceptVocabulary&) const = default;

 private:
  std::vector<std::string> actions_;
  std::vector<std::string> directions_;
  std::vector<std::string> body_parts_;

  std::vector<std::string>& mutable_labels(ConceptKind kind);
};

/// The stock desk-scale vocabulary: 8 actions, 6 directions, 10 body parts.
ConceptVocabulary default_vocabulary();

}  // namespace imore

#endif
