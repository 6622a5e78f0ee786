// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <set>

#include <json.hpp>

#include "imore/errors.hpp"
#include "imore/model.hpp"
#include "imore/text.hpp"

namespace imore {

// --- tokenizer -----------------------------------------------------------------

std::vector<std::string> Tokenizer::split(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (std::isalnum(static_cast<unsigned char>(l)) || l == '_') {
      cur.push_back(l);
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

Tokenizer Tokenizer::build(const std::vector<std::string>& texts) {
  std::set<std::string> words;
  for (const auto& t : texts) {
    for (auto& w : split(t)) words.insert(w);
  }
  std::vector<std::string> vocab;
  vocab.push_back("<unk>");
  vocab.insert(vocab.end(), words.begin(), words.end());
  return from_vocab(std::move(vocab));
}

Tokenizer Tokenizer::from_vocab(std::vector<std::string> vocab) {
  Tokenizer t;
  t.vocab_ = std::move(vocab);
  if (t.vocab_.empty() || t.vocab_[0] != "<unk>") {
    throw ConfigError("tokenizer vocab must start with <unk>");
  }
  for (size_t i = 0; i < t.vocab_.size(); ++i) t.index_[t.vocab_[i]] = static_cast<int>(i);
  return t;
}

std::vector<int> Tokenizer::encode(const std::string& text) const {
  std::vector<int> ids;
  for (const auto& w : split(text)) {
    auto it = index_.find(w);
    ids.push_back(it == index_.end() ? 0 : it->second);
  }
  if (ids.empty()) ids.push_back(0);
  return ids;
}

std::string question_type_phrase(QuestionType qtype) {
  switch (qtype) {
    case QuestionType::QueryAction: return "query action";
    case QuestionType::QueryDirection: return "query direction";
    case QuestionType::QueryBodyPart: return "query body part";
  }
  return "";
}

int concept_count(const ConceptVocabulary& vocab) {
  return static_cast<int>(vocab.labels(ConceptKind::Action).size() +
                          vocab.labels(ConceptKind::Direction).size() +
                          vocab.labels(ConceptKind::BodyPart).size());
}

int concept_id(const ConceptVocabulary& vocab, const Concept& concept_arg) {
  const int a = static_cast<int>(vocab.labels(ConceptKind::Action).size());
  const int d = static_cast<int>(vocab.labels(ConceptKind::Direction).size());
  switch (concept_arg.kind) {
    case ConceptKind::Action: return vocab.index_of(ConceptKind::Action, concept_arg.label);
    case ConceptKind::Direction:
      return a + vocab.index_of(ConceptKind::Direction, concept_arg.label);
    case ConceptKind::BodyPart:
      return a + d + vocab.index_of(ConceptKind::BodyPart, concept_arg.label);
  }
  return 0;
}

int null_concept_id(const ConceptVocabulary& vocab) { return concept_count(vocab); }

// --- model config ----------------------------------------------------------------

const char* to_string(Variant variant) {
  switch (variant) {
    case Variant::Full: return "full";
    case Variant::NoFeatureSelection: return "no_feature_selection";
    case Variant::MacControl: return "mac_control";
  }
  return "?";
}

Variant variant_from_string(const std::string& name) {
  if (name == "full") return Variant::Full;
  if (name == "no_feature_selection") return Variant::NoFeatureSelection;
  if (name == "mac_control") return Variant::MacControl;
  throw ConfigError("unknown model variant: " + name);
}

void ModelConfig::validate() const {
  if (window <= 0 || temporal_patch <= 0 || window % temporal_patch != 0) {
    throw ConfigError("window must be a positive multiple of temporal_patch");
  }
  if (d <= 0 || enc_blocks < 1 || ffn_mult < 1) throw ConfigError("bad encoder dimensions");
  if (enc_heads < 1 || d % enc_heads != 0) {
    throw ConfigError("d must be divisible by enc_heads");
  }
  for (size_t i = 0; i < pool_levels.size(); ++i) {
    if (pool_levels[i] < 0 || pool_levels[i] >= enc_blocks) {
      throw ConfigError("pool level out of range");
    }
    if (i > 0 && pool_levels[i] <= pool_levels[i - 1]) {
      throw ConfigError("pool levels must be strictly increasing");
    }
  }
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0,1)");
  if (text_blocks < 0 || max_text_len < 4 || max_steps < 4) {
    throw ConfigError("bad text/step limits");
  }
  if (mode2_runs < 1) throw ConfigError("mode2_runs must be >= 1");
  if (token_vocab < 1 || n_actions < 1 || n_directions < 1 || n_body_parts < 1 ||
      n_concepts < 1) {
    throw ConfigError("model config is not bound to a dataset vocabulary");
  }
}

int ModelConfig::tokens_per_window() const {
  return n_tpatch() * static_cast<int>(patch_groups().size());
}

std::vector<int> ModelConfig::effective_levels() const {
  if (variant == Variant::NoFeatureSelection) return {};
  return pool_levels;
}

int ModelConfig::level_count() const {
  const auto eff = effective_levels();
  return static_cast<int>(eff.size()) + ((pool_final || eff.empty()) ? 1 : 0);
}

int ModelConfig::branch_size(QuestionType qtype) const {
  switch (qtype) {
    case QuestionType::QueryAction: return n_actions;
    case QuestionType::QueryDirection: return n_directions;
    case QuestionType::QueryBodyPart: return n_body_parts;
  }
  return 0;
}

std::string model_config_to_json(const ModelConfig& c) {
  nlohmann::json j;
  j["window"] = c.window;
  j["temporal_patch"] = c.temporal_patch;
  j["d"] = c.d;
  j["enc_blocks"] = c.enc_blocks;
  j["enc_heads"] = c.enc_heads;
  j["ffn_mult"] = c.ffn_mult;
  j["pool_levels"] = c.pool_levels;
  j["pool_final"] = c.pool_final;
  j["text_blocks"] = c.text_blocks;
  j["max_text_len"] = c.max_text_len;
  j["max_steps"] = c.max_steps;
  j["dropout"] = c.dropout;
  j["variant"] = to_string(c.variant);
  j["mode2_runs"] = c.mode2_runs;
  j["mode2_select_prob"] = c.mode2_select_prob;
  j["token_vocab"] = c.token_vocab;
  j["n_actions"] = c.n_actions;
  j["n_directions"] = c.n_directions;
  j["n_body_parts"] = c.n_body_parts;
  j["n_concepts"] = c.n_concepts;
  return j.dump();
}

ModelConfig model_config_from_json(const std::string& json_text) {
  static const std::set<std::string> known = {
      "window", "temporal_patch", "d", "enc_blocks", "enc_heads", "ffn_mult",
      "pool_levels", "pool_final", "text_blocks", "max_text_len", "max_steps",
      "dropout", "variant", "mode2_runs", "mode2_select_prob", "token_vocab",
      "n_actions", "n_directions", "n_body_parts", "n_concepts"};
  ModelConfig c;
  try {
    const auto j = nlohmann::json::parse(json_text);
    for (const auto& [key, _] : j.items()) {
      if (!known.count(key)) throw ConfigError("unknown model config key: " + key);
    }
    c.window = j.value("window", c.window);
    c.temporal_patch = j.value("temporal_patch", c.temporal_patch);
    c.d = j.value("d", c.d);
    c.enc_blocks = j.value("enc_blocks", c.enc_blocks);
    c.enc_heads = j.value("enc_heads", c.enc_heads);
    c.ffn_mult = j.value("ffn_mult", c.ffn_mult);
    if (j.contains("pool_levels")) c.pool_levels = j.at("pool_levels").get<std::vector<int>>();
    c.pool_final = j.value("pool_final", c.pool_final);
    c.text_blocks = j.value("text_blocks", c.text_blocks);
    c.max_text_len = j.value("max_text_len", c.max_text_len);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.dropout = j.value("dropout", c.dropout);
    if (j.contains("variant")) c.variant = variant_from_string(j.at("variant").get<std::string>());
    c.mode2_runs = j.value("mode2_runs", c.mode2_runs);
    c.mode2_select_prob = j.value("mode2_select_prob", c.mode2_select_prob);
    c.token_vocab = j.value("token_vocab", c.token_vocab);
    c.n_actions = j.value("n_actions", c.n_actions);
    c.n_directions = j.value("n_directions", c.n_directions);
    c.n_body_parts = j.value("n_body_parts", c.n_body_parts);
    c.n_concepts = j.value("n_concepts", c.n_concepts);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad model config json: " + std::string(e.what()));
  }
  return c;
}

// --- featurizer window plans ------------------------------------------------------

std::vector<int> Featurizer::mode1_starts(int frame_count) const {
  const int W = config_.window;
  const int T = std::max(frame_count, W);  // loop-padded below W
  std::vector<int> starts;
  for (int s = 0; s + W <= T; s += W) starts.push_back(s);
  if (starts.empty() || starts.back() + W < T) starts.push_back(T - W);  // right-aligned tail
  return starts;
}

int Featurizer::start_range(int frame_count) const {
  return std::max(frame_count, config_.window) - config_.window + 1;
}

}  // namespace imore
