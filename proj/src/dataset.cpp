// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#include "imore/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "imore/errors.hpp"
#include "imore/rng.hpp"

namespace imore {

const char* to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

Split split_from_string(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw SchemaError("unknown split: " + name);
}

Split split_of_motion(const std::string& motion_id, const SplitRatios& ratios) {
  const double u = static_cast<double>(fnv1a(motion_id) % 100000) / 100000.0;
  if (u < ratios.train) return Split::Train;
  if (u < ratios.train + ratios.val) return Split::Val;
  return Split::Test;
}

std::string CellKey::name() const {
  std::string s = to_string(question_type);
  s += '.';
  s += relation ? to_string(*relation) : "none";
  return s;
}

std::vector<const QAExample*> DatasetManifest::split_examples(Split split) const {
  std::vector<const QAExample*> out;
  for (const auto& e : examples) {
    if (e.split == split) out.push_back(&e);
  }
  return out;
}

// --- surface forms -----------------------------------------------------------

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

std::string gerundize_word(const std::string& w) {
  const size_t n = w.size();
  if (n >= 2 && w[n - 1] == 'e' && w[n - 2] != 'e') return w.substr(0, n - 1) + "ing";
  if (n >= 3 && !is_vowel(w[n - 1]) && w[n - 1] != 'w' && w[n - 1] != 'x' && w[n - 1] != 'y' &&
      is_vowel(w[n - 2]) && !is_vowel(w[n - 3])) {
    return w + w[n - 1] + "ing";
  }
  return w + "ing";
}

std::string spaces(const std::string& label) {
  std::string out = label;
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

const std::map<std::string, SurfaceForms>& action_overrides() {
  static const std::map<std::string, SurfaceForms> table = {
      {"raise_arm", {"raise their arm", "raising their arm"}},
      {"pick_up", {"pick up", "picking up"}},
      {"sit", {"sit down", "sitting down"}},
      {"stand", {"stand up", "standing up"}},
      {"squat", {"squat", "squatting"}},
      {"step", {"step", "stepping"}},
  };
  return table;
}

}  // namespace

SurfaceForms surface_forms(const Concept& concept_arg) {
  switch (concept_arg.kind) {
    case ConceptKind::Action: {
      auto it = action_overrides().find(concept_arg.label);
      if (it != action_overrides().end()) return it->second;
      const std::string text = spaces(concept_arg.label);
      const size_t space = text.find(' ');
      if (space == std::string::npos) return {text, gerundize_word(text)};
      return {text, gerundize_word(text.substr(0, space)) + text.substr(space)};
    }
    case ConceptKind::Direction:
      return {"move " + spaces(concept_arg.label), "moving " + spaces(concept_arg.label)};
    case ConceptKind::BodyPart:
      return {"use their " + spaces(concept_arg.label),
              "using their " + spaces(concept_arg.label)};
  }
  return {concept_arg.label, concept_arg.label};
}

// --- templates ----------------------------------------------------------------

namespace {

struct TemplateText {
  // Full question with {A} / {B} placeholders; {A},{B} take gerunds for
  // between cells and base forms otherwise.
  std::string text;
};

const std::vector<TemplateText>& templates_for(QuestionType qtype,
                                               const std::optional<Relation>& rel) {
  using V = std::vector<TemplateText>;
  static const std::map<std::pair<int, int>, V> table = [] {
    std::map<std::pair<int, int>, V> t;
    auto key = [](QuestionType q, int r) { return std::make_pair(static_cast<int>(q), r); };
    // relation index: 0 none, 1 before, 2 after, 3 between
    t[key(QuestionType::QueryAction, 0)] = {
        {"What action does the person do while they {A}?"},
        {"Which action is performed while they {A}?"}};
    t[key(QuestionType::QueryAction, 1)] = {
        {"What action does the person do before they {A}?"},
        {"Which action is performed before they {A}?"}};
    t[key(QuestionType::QueryAction, 2)] = {
        {"What action does the person do after they {A}?"},
        {"Which action is performed after they {A}?"}};
    t[key(QuestionType::QueryAction, 3)] = {
        {"What action does the person do between {A} and {B}?"},
        {"Which action is performed between {A} and {B}?"}};
    t[key(QuestionType::QueryDirection, 0)] = {
        {"Which direction does the person move while they {A}?"},
        {"In which direction does the person move while they {A}?"}};
    t[key(QuestionType::QueryDirection, 1)] = {
        {"Which direction does the person move before they {A}?"},
        {"In which direction does the person move before they {A}?"}};
    t[key(QuestionType::QueryDirection, 2)] = {
        {"Which direction does the person move after they {A}?"},
        {"In which direction does the person move after they {A}?"}};
    t[key(QuestionType::QueryDirection, 3)] = {
        {"Which direction does the person move between {A} and {B}?"},
        {"In which direction does the person move between {A} and {B}?"}};
    t[key(QuestionType::QueryBodyPart, 0)] = {
        {"What body part does the person use while they {A}?"},
        {"Which body part does the person move while they {A}?"}};
    t[key(QuestionType::QueryBodyPart, 1)] = {
        {"What body part does the person use before they {A}?"},
        {"Which body part does the person move before they {A}?"}};
    t[key(QuestionType::QueryBodyPart, 2)] = {
        {"What body part does the person use after they {A}?"},
        {"Which body part does the person move after they {A}?"}};
    t[key(QuestionType::QueryBodyPart, 3)] = {
        {"What body part does the person use between {A} and {B}?"},
        {"Which body part does the person move between {A} and {B}?"}};
    return t;
  }();
  const int r = !rel ? 0 : (*rel == Relation::Before ? 1 : (*rel == Relation::After ? 2 : 3));
  return table.at({static_cast<int>(qtype), r});
}

std::string fill(const std::string& tmpl, const std::vector<std::string>& slots) {
  std::string out = tmpl;
  const char* names[2] = {"{A}", "{B}"};
  for (size_t i = 0; i < slots.size(); ++i) {
    const size_t pos = out.find(names[i]);
    if (pos != std::string::npos) out.replace(pos, 3, slots[i]);
  }
  return out;
}

}  // namespace

std::string render_question(QuestionType qtype, std::optional<Relation> relation,
                            const std::vector<Concept>& anchors, int variant) {
  const size_t want = relation && *relation == Relation::Between ? 2 : 1;
  if (anchors.size() != want) throw ArityError("anchor count does not match relation");
  const auto& tmpls = templates_for(qtype, relation);
  const auto& tmpl = tmpls[static_cast<size_t>(variant) % tmpls.size()];
  std::vector<std::string> slots;
  for (const auto& a : anchors) {
    const SurfaceForms forms = surface_forms(a);
    slots.push_back(want == 2 ? forms.gerund : forms.base);
  }
  return fill(tmpl.text, slots);
}

// --- question -> program -----------------------------------------------------

namespace {

std::string normalize(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    const char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (l == '?' || l == '.') continue;
    if (std::isspace(static_cast<unsigned char>(l))) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(l);
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

// surface string -> concept, for both base and gerund forms
std::map<std::string, Concept> reverse_surface_map(const ConceptVocabulary& vocab) {
  std::map<std::string, Concept> out;
  std::set<std::string> ambiguous;
  for (ConceptKind k : {ConceptKind::Action, ConceptKind::Direction, ConceptKind::BodyPart}) {
    for (const auto& label : vocab.labels(k)) {
      const Concept c{k, label};
      for (const std::string& form : {surface_forms(c).base, surface_forms(c).gerund}) {
        const std::string key = normalize(form);
        if (out.count(key) && !(out.at(key) == c)) ambiguous.insert(key);
        out.emplace(key, c);
      }
    }
  }
  for (const auto& key : ambiguous) out.erase(key);
  return out;
}

struct TemplateMatch {
  std::vector<std::string> anchors;
};

// Exactly matches `question` against a template skeleton, extracting slot text.
std::optional<TemplateMatch> match_template(const std::string& question, const std::string& tmpl) {
  std::vector<std::string> literals;
  std::string rest = tmpl;
  size_t nslots = 0;
  while (true) {
    const size_t pos = rest.find('{');
    if (pos == std::string::npos) {
      literals.push_back(rest);
      break;
    }
    literals.push_back(rest.substr(0, pos));
    rest = rest.substr(pos + 3);  // skip {A} / {B}
    ++nslots;
  }
  TemplateMatch match;
  size_t cursor = 0;
  for (size_t i = 0; i < literals.size(); ++i) {
    const std::string& lit = literals[i];
    if (i == 0) {
      if (question.rfind(lit, 0) != 0) return std::nullopt;
      cursor = lit.size();
      continue;
    }
    size_t pos;
    if (i + 1 == literals.size() && nslots == i) {
      // last literal must close the question
      if (question.size() < cursor + lit.size()) return std::nullopt;
      pos = question.size() - lit.size();
      if (question.compare(pos, lit.size(), lit) != 0) return std::nullopt;
    } else {
      pos = question.find(lit, cursor);
      if (pos == std::string::npos) return std::nullopt;
    }
    if (pos < cursor || (pos == cursor)) return std::nullopt;  // empty slot
    match.anchors.push_back(question.substr(cursor, pos - cursor));
    cursor = pos + lit.size();
  }
  if (cursor != question.size()) return std::nullopt;
  return match;
}

Program build_program(QuestionType qtype, const std::optional<Relation>& rel,
                      const std::vector<Concept>& anchors) {
  if (!rel) return Program(make_query(qtype, make_filter(anchors.at(0))));
  if (*rel == Relation::Between) {
    std::vector<ProgramNodePtr> args;
    args.push_back(make_filter(anchors.at(0)));
    args.push_back(make_filter(anchors.at(1)));
    return Program(make_query(qtype, make_relate(Relation::Between, std::move(args))));
  }
  std::vector<ProgramNodePtr> args;
  args.push_back(make_filter(anchors.at(0)));
  return Program(make_query(qtype, make_relate(*rel, std::move(args))));
}

}  // namespace

PredictedProgram predict_program(const std::string& question, const ConceptVocabulary& vocab) {
  const std::string q = normalize(question);
  const auto surfaces = reverse_surface_map(vocab);

  const std::optional<Relation> rels[4] = {std::nullopt, Relation::Before, Relation::After,
                                           Relation::Between};
  for (QuestionType qtype : {QuestionType::QueryAction, QuestionType::QueryDirection,
                             QuestionType::QueryBodyPart}) {
    for (const auto& rel : rels) {
      for (const auto& tmpl : templates_for(qtype, rel)) {
        auto match = match_template(q, normalize(tmpl.text));
        if (!match) continue;
        std::vector<Concept> anchors;
        bool ok = true;
        for (const auto& text : match->anchors) {
          auto it = surfaces.find(text);
          if (it == surfaces.end()) { ok = false; break; }
          anchors.push_back(it->second);
        }
        if (!ok) continue;
        return {build_program(qtype, rel, anchors), true};
      }
    }
  }

  // Nearest-template fallback: recognize the question-type prefix and the
  // relation keyword, then scan for known concept surfaces.
  struct Prefix { const char* text; QuestionType qtype; };
  static const Prefix prefixes[] = {
      {"what action", QuestionType::QueryAction},
      {"which action", QuestionType::QueryAction},
      {"which direction", QuestionType::QueryDirection},
      {"in which direction", QuestionType::QueryDirection},
      {"what body part", QuestionType::QueryBodyPart},
      {"which body part", QuestionType::QueryBodyPart},
  };
  std::optional<QuestionType> qtype;
  for (const auto& p : prefixes) {
    if (q.rfind(p.text, 0) == 0) { qtype = p.qtype; break; }
  }
  if (!qtype) throw UnparsableQuestionError("unrecognized question form: " + question);

  std::optional<Relation> rel;
  if (q.find(" between ") != std::string::npos) rel = Relation::Between;
  else if (q.find(" before ") != std::string::npos) rel = Relation::Before;
  else if (q.find(" after ") != std::string::npos) rel = Relation::After;

  // longest surfaces first so "move left" wins over shorter overlaps
  std::vector<std::pair<std::string, Concept>> forms(surfaces.begin(), surfaces.end());
  std::sort(forms.begin(), forms.end(), [](const auto& a, const auto& b) {
    return a.first.size() > b.first.size();
  });
  std::vector<std::pair<size_t, Concept>> found;
  std::string scratch = q;
  for (const auto& [text, concept_arg] : forms) {
    const size_t pos = scratch.find(text);
    if (pos != std::string::npos) {
      found.emplace_back(pos, concept_arg);
      std::fill(scratch.begin() + pos, scratch.begin() + pos + text.size(), '#');
    }
  }
  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const size_t want = rel && *rel == Relation::Between ? 2 : 1;
  if (found.size() < want) {
    throw UnparsableQuestionError("could not recover program anchors from: " + question);
  }
  std::vector<Concept> anchors;
  for (size_t i = 0; i < want; ++i) anchors.push_back(found[i].second);
  return {build_program(*qtype, rel, anchors), false};
}

// --- corruption ---------------------------------------------------------------

namespace {

void corrupt_node(ProgramNode& node, double rate, Rng& rng, const ConceptVocabulary& vocab) {
  for (auto& c : node.children) corrupt_node(*c, rate, rng, vocab);
  if (is_filter(node.func)) {
    if (rng.uniform() < rate) {
      const auto& labels = vocab.labels(node.concept_arg->kind);
      if (labels.size() > 1) {
        std::vector<std::string> others;
        for (const auto& l : labels) {
          if (l != node.concept_arg->label) others.push_back(l);
        }
        node.concept_arg->label = others[rng.below(others.size())];
      }
    }
  } else if (is_relate(node.func)) {
    if (rng.uniform() < rate) {
      if (node.func == Func::RelateBefore) node.func = Func::RelateAfter;
      else if (node.func == Func::RelateAfter) node.func = Func::RelateBefore;
      else std::swap(node.children[0], node.children[1]);  // between: swap anchors
    }
  }
}

}  // namespace

Program corrupt_program(const Program& program, double rate, std::uint64_t rng_seed,
                        const ConceptVocabulary& vocab) {
  if (rate < 0.0 || rate > 1.0) throw ConfigError("corruption rate must be in [0,1]");
  Rng rng(rng_seed);
  auto root = program.root->clone();
  if (rate > 0.0) corrupt_node(*root, rate, rng, vocab);
  return Program(std::move(root));
}

// --- generation ----------------------------------------------------------------

namespace {

std::vector<Concept> concepts_present(const MotionSequence& motion) {
  std::vector<Concept> out;
  auto push = [&out](const Concept& c) {
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  };
  for (const auto& seg : motion.segments) {
    push(seg.action);
    if (seg.direction) push(*seg.direction);
    for (const auto& bp : seg.body_parts) push(bp);
  }
  return out;
}

std::vector<Concept> program_anchors(const Program& program) {
  std::vector<Concept> anchors;
  for (const auto& step : program.steps) {
    if (step.concept_arg) anchors.push_back(*step.concept_arg);
  }
  return anchors;
}

struct Candidate {
  std::string motion_id;
  Program program;
  Concept answer;
  Split split;
};

}  // namespace

DatasetManifest generate_dataset(const std::vector<MotionSequence>& motions,
                                 std::uint64_t rng_seed, const DatasetConfig& config,
                                 const ConceptVocabulary& vocab) {
  for (const auto& m : motions) {
    if (m.segments.size() < 2) {
      throw ConfigError("motion " + m.id + " has fewer than 2 segments");
    }
  }

  std::map<CellKey, std::vector<Candidate>> pools;
  std::set<std::string> seen;

  for (const auto& motion : motions) {
    const Split split = split_of_motion(motion.id, config.ratios);
    const auto present = concepts_present(motion);
    for (QuestionType qtype : {QuestionType::QueryAction, QuestionType::QueryDirection,
                               QuestionType::QueryBodyPart}) {
      for (const auto& rel : config.relations) {
        std::vector<std::vector<Concept>> anchor_tuples;
        if (!rel) {
          for (const auto& c : present) {
            // A plain filter question whose anchor kind equals the answer
            // kind answers itself; skip those.
            if (c.kind != answer_kind(qtype)) anchor_tuples.push_back({c});
          }
        } else if (*rel == Relation::Between) {
          for (const auto& a : present) {
            for (const auto& b : present) {
              if (!(a == b)) anchor_tuples.push_back({a, b});
            }
          }
        } else {
          for (const auto& c : present) anchor_tuples.push_back({c});
        }
        for (const auto& anchors : anchor_tuples) {
          Program program = build_program(qtype, rel, anchors);
          const std::string key = motion.id + "|" + to_text(program);
          if (seen.count(key)) continue;
          ExecResult r = execute(motion, program);
          if (!r.ok()) continue;  // ambiguous or unanswerable: discarded
          seen.insert(key);
          pools[CellKey{qtype, rel}].push_back(
              Candidate{motion.id, std::move(program), *r.answer, split});
        }
      }
    }
  }

  DatasetManifest manifest;
  manifest.vocab = vocab;
  manifest.seed = rng_seed;

  Rng rng(rng_seed);
  std::vector<std::string> shortfalls;
  for (QuestionType qtype : {QuestionType::QueryAction, QuestionType::QueryDirection,
                             QuestionType::QueryBodyPart}) {
    for (const auto& rel : config.relations) {
      const CellKey cell{qtype, rel};
      int quota = config.per_cell_quota;
      if (auto it = config.cell_overrides.find(cell.name()); it != config.cell_overrides.end()) {
        quota = it->second;
      }
      auto& pool = pools[cell];
      // seeded shuffle
      for (size_t i = pool.size(); i > 1; --i) {
        std::swap(pool[i - 1], pool[rng.below(i)]);
      }
      if (static_cast<int>(pool.size()) < quota) {
        shortfalls.push_back(cell.name() + ": wanted " + std::to_string(quota) + ", have " +
                             std::to_string(pool.size()));
      }
      const int take = std::min<int>(quota, static_cast<int>(pool.size()));
      // Greedy answer balancing within the cell.
      std::map<std::string, int> answer_counts;
      std::vector<bool> used(pool.size(), false);
      for (int t = 0; t < take; ++t) {
        int best = -1;
        int best_count = INT32_MAX;
        for (size_t i = 0; i < pool.size(); ++i) {
          if (used[i]) continue;
          const int count = answer_counts[pool[i].answer.label];
          if (count < best_count) {
            best_count = count;
            best = static_cast<int>(i);
          }
        }
        used[best] = true;
        answer_counts[pool[best].answer.label] += 1;
        Candidate& c = pool[best];
        QAExample ex;
        ex.motion_id = c.motion_id;
        ex.question_type = qtype;
        ex.program = std::move(c.program);
        ex.answer = c.answer;
        ex.split = c.split;
        const std::string ptext = to_text(ex.program);
        ex.question = render_question(
            qtype, rel, program_anchors(ex.program),
            static_cast<int>(fnv1a(c.motion_id + "|" + ptext) % kTemplateVariants));
        manifest.examples.push_back(std::move(ex));
      }
      manifest.cell_counts[cell.name()] = take;
    }
  }

  if (!shortfalls.empty() && !config.allow_underfull) {
    std::string msg = "quota unreachable in " + std::to_string(shortfalls.size()) + " cell(s): ";
    for (size_t i = 0; i < shortfalls.size(); ++i) {
      if (i) msg += "; ";
      msg += shortfalls[i];
    }
    throw QuotaUnreachableError(msg);
  }

  for (size_t i = 0; i < manifest.examples.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "q%06zu", i);
    manifest.examples[i].id = buf;
  }

  if (!config.allow_underfull) {
    // Every answer label of a kind with active cells must occur in train.
    for (QuestionType qtype : {QuestionType::QueryAction, QuestionType::QueryDirection,
                               QuestionType::QueryBodyPart}) {
      bool active = false;
      for (const auto& rel : config.relations) {
        int quota = config.per_cell_quota;
        const CellKey cell{qtype, rel};
        if (auto it = config.cell_overrides.find(cell.name());
            it != config.cell_overrides.end()) {
          quota = it->second;
        }
        active |= quota > 0;
      }
      if (!active) continue;
      std::set<std::string> seen_answers;
      for (const auto& e : manifest.examples) {
        if (e.split == Split::Train && e.question_type == qtype) {
          seen_answers.insert(e.answer.label);
        }
      }
      for (const auto& label : vocab.labels(answer_kind(qtype))) {
        if (!seen_answers.count(label)) {
          throw QuotaUnreachableError("answer label never occurs in train: " + label +
                                      " (" + to_string(qtype) + "); use more motions");
        }
      }
    }
  }
  return manifest;
}

// --- files ---------------------------------------------------------------------

namespace {

nlohmann::json vocab_to_json(const ConceptVocabulary& vocab) {
  return {{"actions", vocab.labels(ConceptKind::Action)},
          {"directions", vocab.labels(ConceptKind::Direction)},
          {"body_parts", vocab.labels(ConceptKind::BodyPart)}};
}

ConceptVocabulary vocab_from_json(const nlohmann::json& j) {
  ConceptVocabulary vocab;
  vocab.add_all(ConceptKind::Action, j.at("actions").get<std::vector<std::string>>());
  vocab.add_all(ConceptKind::Direction, j.at("directions").get<std::vector<std::string>>());
  vocab.add_all(ConceptKind::BodyPart, j.at("body_parts").get<std::vector<std::string>>());
  return vocab;
}

}  // namespace

void save_manifest(const std::string& path, const DatasetManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  nlohmann::json meta;
  meta["type"] = "meta";
  meta["version"] = 1;
  meta["seed"] = manifest.seed;
  meta["config_hash"] = manifest.config_hash;
  meta["vocab"] = vocab_to_json(manifest.vocab);
  meta["cell_counts"] = manifest.cell_counts;
  out << meta.dump() << "\n";
  for (const auto& e : manifest.examples) {
    nlohmann::json j;
    j["id"] = e.id;
    j["motion_id"] = e.motion_id;
    j["question"] = e.question;
    j["question_type"] = to_string(e.question_type);
    j["program"] = to_text(e.program);
    j["answer"] = e.answer.label;
    j["split"] = to_string(e.split);
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty manifest: " + path);
  DatasetManifest manifest;
  try {
    const auto meta = nlohmann::json::parse(line);
    if (meta.at("type") != "meta") throw FormatError("manifest must start with a meta record");
    manifest.seed = meta.at("seed").get<std::uint64_t>();
    manifest.config_hash = meta.value("config_hash", "");
    manifest.vocab = vocab_from_json(meta.at("vocab"));
    if (meta.contains("cell_counts")) {
      manifest.cell_counts = meta.at("cell_counts").get<std::map<std::string, int>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad manifest meta: " + std::string(e.what()));
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      QAExample e;
      e.id = j.at("id").get<std::string>();
      e.motion_id = j.at("motion_id").get<std::string>();
      e.question = j.at("question").get<std::string>();
      e.question_type = question_type_from_string(j.at("question_type").get<std::string>());
      e.program = parse_program(j.at("program").get<std::string>(), manifest.vocab);
      e.answer = manifest.vocab.make(answer_kind(e.question_type), j.at("answer").get<std::string>());
      e.split = split_from_string(j.at("split").get<std::string>());
      if (e.program.question_type != e.question_type) {
        throw SchemaError("program/question type mismatch");
      }
      manifest.examples.push_back(std::move(e));
    } catch (const nlohmann::json::exception& err) {
      throw FormatError("bad manifest record at line " + std::to_string(line_no) + ": " +
                        err.what());
    }
  }
  return manifest;
}

DatasetManifest import_external(const std::string& path, const ConceptVocabulary& vocab,
                                ImportReport* report) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  DatasetManifest manifest;
  manifest.vocab = vocab;
  ImportReport local;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      QAExample e;
      e.motion_id = j.at("motion_ref").get<std::string>();
      e.question = j.at("question").get<std::string>();
      e.program = parse_program(j.at("program_text").get<std::string>(), vocab);
      e.question_type = e.program.question_type;
      e.answer = vocab.make(answer_kind(e.question_type), j.at("answer").get<std::string>());
      e.split = split_from_string(j.at("split").get<std::string>());
      char buf[16];
      std::snprintf(buf, sizeof buf, "x%06d", line_no);
      e.id = buf;
      manifest.examples.push_back(std::move(e));
      ++local.imported;
    } catch (const nlohmann::json::exception& err) {
      local.skipped.emplace_back(line_no, std::string("schema: ") + err.what());
    } catch (const Error& err) {
      local.skipped.emplace_back(line_no, err.what());
    }
  }
  if (report) *report = local;
  return manifest;
}

void export_external(const std::string& path, const DatasetManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const auto& e : manifest.examples) {
    nlohmann::json j;
    j["motion_ref"] = e.motion_id;
    j["question"] = e.question;
    j["program_text"] = to_text(e.program);
    j["answer"] = e.answer.label;
    j["split"] = to_string(e.split);
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<std::string> verify_manifest(const DatasetManifest& manifest,
                                         const std::map<std::string, MotionSequence>& motions) {
  std::vector<std::string> mismatched;
  for (const auto& e : manifest.examples) {
    auto it = motions.find(e.motion_id);
    if (it == motions.end()) {
      mismatched.push_back(e.id);
      continue;
    }
    ExecResult r = execute(it->second, e.program);
    if (!r.ok() || !(r.answer == e.answer)) mismatched.push_back(e.id);
  }
  return mismatched;
}

}  // namespace imore
