// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef IMORE_TEXT_HPP
#define IMORE_TEXT_HPP

#include <map>
#include <string>
#include <vector>

#include "imore/concepts.hpp"
#include "imore/program.hpp"

namespace imore {

/// Whitespace/punctuation tokenizer with a fixed vocabulary built from the
/// train split; id 0 is <unk>.
class Tokenizer {
 public:
  static std::vector<std::string> split(const std::string& text);
  static Tokenizer build(const std::vector<std::string>& texts);

  std::vector<int> encode(const std::string& text) const;
  int vocab_size() const { return static_cast<int>(vocab_.size()); }
  const std::vector<std::string>& vocab() const { return vocab_; }

  static Tokenizer from_vocab(std::vector<std::string> vocab);

 private:
  std::vector<std::string> vocab_;  // [0] = <unk>
  std::map<std::string, int> index_;
};

/// Phrase encoded for the question-type stream ("query action" etc).
std::string question_type_phrase(QuestionType qtype);

/// Flat concept-id space across kinds for the program embedding table:
/// actions, then directions, then body parts; one extra id for "no concept".
int concept_count(const ConceptVocabulary& vocab);
int concept_id(const ConceptVocabulary& vocab, const Concept& concept_arg);
int null_concept_id(const ConceptVocabulary& vocab);

}  // namespace imore

#endif
