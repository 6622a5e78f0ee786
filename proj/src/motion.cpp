// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#include "imore/motion.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include <json.hpp>

#include "imore/errors.hpp"

namespace imore {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

const std::array<Vec3, kJointCount>& neutral_pose() {
  static const std::array<Vec3, kJointCount> pose = {{
      {0.00f, 1.00f, 0.00f},   // pelvis
      {0.00f, 1.15f, 0.00f},   // spine
      {0.00f, 1.30f, 0.00f},   // chest
      {0.00f, 1.45f, 0.00f},   // neck
      {0.00f, 1.60f, 0.00f},   // head
      {0.20f, 1.40f, 0.00f},   // left shoulder
      {0.28f, 1.12f, 0.00f},   // left elbow
      {0.32f, 0.88f, 0.00f},   // left wrist
      {-0.20f, 1.40f, 0.00f},  // right shoulder
      {-0.28f, 1.12f, 0.00f},  // right elbow
      {-0.32f, 0.88f, 0.00f},  // right wrist
      {0.10f, 0.95f, 0.00f},   // left hip
      {0.11f, 0.50f, 0.00f},   // left knee
      {0.12f, 0.08f, 0.00f},   // left ankle
      {-0.10f, 0.95f, 0.00f},  // right hip
      {-0.11f, 0.50f, 0.00f},  // right knee
      {-0.12f, 0.08f, 0.00f},  // right ankle
  }};
  return pose;
}

const std::vector<int>& joints_of_body_part(const std::string& label) {
  static const std::map<std::string, std::vector<int>> table = {
      {"torso", {kPelvis, kSpine, kChest, kNeck}},
      {"head", {kHead}},
      {"left_arm", {kLeftShoulder, kLeftElbow}},
      {"left_hand", {kLeftWrist}},
      {"right_arm", {kRightShoulder, kRightElbow}},
      {"right_hand", {kRightWrist}},
      {"left_leg", {kLeftHip, kLeftKnee}},
      {"left_foot", {kLeftAnkle}},
      {"right_leg", {kRightHip, kRightKnee}},
      {"right_foot", {kRightAnkle}},
  };
  auto it = table.find(label);
  if (it == table.end()) throw UnknownConceptError("unknown body part label: " + label);
  return it->second;
}

const std::vector<PatchGroup>& patch_groups() {
  static const std::vector<PatchGroup> groups = {
      {"torso", {kPelvis, kSpine, kChest, kNeck}},
      {"head", {kHead}},
      {"left_arm", {kLeftShoulder, kLeftElbow, kLeftWrist}},
      {"right_arm", {kRightShoulder, kRightElbow, kRightWrist}},
      {"left_leg", {kLeftHip, kLeftKnee, kLeftAnkle}},
      {"right_leg", {kRightHip, kRightKnee, kRightAnkle}},
  };
  return groups;
}

void MotionSequence::validate() const {
  if (segments.empty()) throw FormatError("motion has no segments");
  if (frames.joint_count != kJointCount) throw FormatError("unexpected joint count");
  int cursor = 0;
  for (const auto& seg : segments) {
    if (seg.start_frame != cursor || seg.end_frame <= seg.start_frame) {
      throw FormatError("segments must be contiguous and non-empty");
    }
    cursor = seg.end_frame;
    if (seg.body_parts.empty()) throw FormatError("segment without body parts");
    if (std::find(seg.body_parts.begin(), seg.body_parts.end(), seg.primary_body_part) ==
        seg.body_parts.end()) {
      throw FormatError("primary body part not among body parts");
    }
  }
  if (cursor != frames.frame_count) throw FormatError("segments do not cover all frames");
}

Vec3 MotionPrimitive::offset(int joint, double u) const {
  const double b = std::sin(kPi * u);
  Vec3 o{static_cast<float>(global_bump.x * b), static_cast<float>(global_bump.y * b),
         static_cast<float>(global_bump.z * b)};
  for (const auto& d : drives) {
    if (d.joint != joint) continue;
    const double s = std::sin(kTwoPi * d.cycles * u + d.phase);
    o.x += static_cast<float>(d.bump.x * b + d.osc.x * s);
    o.y += static_cast<float>(d.bump.y * b + d.osc.y * s);
    o.z += static_cast<float>(d.bump.z * b + d.osc.z * s);
  }
  return o;
}

namespace {

struct Side {
  const char* tag;  // "left" / "right"
  int shoulder, elbow, wrist, hip, knee, ankle;
};

const Side kLeft{"left", kLeftShoulder, kLeftElbow, kLeftWrist, kLeftHip, kLeftKnee, kLeftAnkle};
const Side kRight{"right", kRightShoulder, kRightElbow, kRightWrist, kRightHip, kRightKnee,
                  kRightAnkle};

Concept part(const ConceptVocabulary& vocab, const std::string& label) {
  return vocab.make(ConceptKind::BodyPart, label);
}

MotionPrimitive raise_arm(const ConceptVocabulary& vocab, const Side& s) {
  MotionPrimitive p;
  p.id = std::string("raise_arm_") + s.tag;
  p.action = vocab.make(ConceptKind::Action, "raise_arm");
  p.direction = vocab.make(ConceptKind::Direction, "up");
  p.body_parts = {part(vocab, std::string(s.tag) + "_arm"),
                  part(vocab, std::string(s.tag) + "_hand")};
  p.primary_body_part = p.body_parts[0];
  p.drives = {
      {s.wrist, {0.f, 0.60f, 0.28f}, {0.f, 0.08f, 0.f}, 2.f, 0.f},
      {s.elbow, {0.f, 0.45f, 0.16f}, {0.f, 0.05f, 0.f}, 2.f, 0.f},
      {s.shoulder, {0.f, 0.20f, 0.05f}, {0.f, 0.05f, 0.f}, 2.f, 0.f},
  };
  return p;
}

MotionPrimitive kick(const ConceptVocabulary& vocab, const Side& s) {
  MotionPrimitive p;
  p.id = std::string("kick_") + s.tag;
  p.action = vocab.make(ConceptKind::Action, "kick");
  p.direction = vocab.make(ConceptKind::Direction, "forward");
  p.body_parts = {part(vocab, std::string(s.tag) + "_leg"),
                  part(vocab, std::string(s.tag) + "_foot")};
  p.primary_body_part = p.body_parts[1];
  p.drives = {
      {s.ankle, {0.f, 0.18f, 0.60f}, {0.f, 0.f, 0.10f}, 2.f, 0.f},
      {s.knee, {0.f, 0.10f, 0.35f}, {0.f, 0.f, 0.08f}, 2.f, 0.f},
      {s.hip, {0.f, 0.f, 0.15f}, {0.f, 0.f, 0.05f}, 2.f, 0.f},
  };
  return p;
}

MotionPrimitive step(const ConceptVocabulary& vocab, const std::string& dir) {
  MotionPrimitive p;
  p.id = "step_" + dir;
  p.action = vocab.make(ConceptKind::Action, "step");
  p.direction = vocab.make(ConceptKind::Direction, dir);
  p.body_parts = {part(vocab, "left_leg"), part(vocab, "right_leg"), part(vocab, "left_foot"),
                  part(vocab, "right_foot")};
  p.primary_body_part = dir == "left" ? p.body_parts[0] : p.body_parts[1];
  if (dir == "left") p.travel = {0.45f, 0.f, 0.f};
  else if (dir == "right") p.travel = {-0.45f, 0.f, 0.f};
  else p.travel = {0.f, 0.f, -0.45f};  // backward
  for (const Side* s : {&kLeft, &kRight}) {
    const float phase = (s == &kLeft) ? 0.f : static_cast<float>(kPi);
    p.drives.push_back({s->ankle, {}, {0.f, 0.12f, 0.28f}, 2.f, phase});
    p.drives.push_back({s->knee, {}, {0.f, 0.08f, 0.18f}, 2.f, phase});
    p.drives.push_back({s->hip, {}, {0.f, 0.f, 0.08f}, 2.f, phase});
  }
  return p;
}

MotionPrimitive squat(const ConceptVocabulary& vocab) {
  MotionPrimitive p;
  p.id = "squat";
  p.action = vocab.make(ConceptKind::Action, "squat");
  p.direction = vocab.make(ConceptKind::Direction, "down");
  p.body_parts = {part(vocab, "torso"), part(vocab, "left_leg"), part(vocab, "right_leg")};
  p.primary_body_part = p.body_parts[0];
  for (int j : {kPelvis, kSpine, kChest, kNeck}) {
    p.drives.push_back({j, {0.f, -0.50f, 0.06f}, {0.f, 0.05f, 0.f}, 2.f, 0.f});
  }
  for (const Side* s : {&kLeft, &kRight}) {
    p.drives.push_back({s->hip, {0.f, -0.48f, 0.05f}, {0.f, 0.05f, 0.f}, 2.f, 0.f});
    p.drives.push_back({s->knee, {0.f, -0.22f, 0.30f}, {0.f, 0.05f, 0.f}, 2.f, 0.f});
  }
  return p;
}

MotionPrimitive wave(const ConceptVocabulary& vocab, const Side& s) {
  MotionPrimitive p;
  p.id = std::string("wave_") + s.tag;
  p.action = vocab.make(ConceptKind::Action, "wave");
  p.body_parts = {part(vocab, std::string(s.tag) + "_hand"),
                  part(vocab, std::string(s.tag) + "_arm")};
  p.primary_body_part = p.body_parts[0];
  p.drives = {
      {s.wrist, {0.f, 0.35f, 0.f}, {0.30f, 0.06f, 0.f}, 3.f, 0.f},
      {s.elbow, {0.f, 0.20f, 0.f}, {0.15f, 0.f, 0.f}, 3.f, 0.f},
      {s.shoulder, {0.f, 0.06f, 0.f}, {0.05f, 0.f, 0.f}, 3.f, 0.f},
  };
  return p;
}

MotionPrimitive turn(const ConceptVocabulary& vocab, const std::string& dir) {
  MotionPrimitive p;
  p.id = "turn_" + dir;
  p.action = vocab.make(ConceptKind::Action, "turn");
  p.direction = vocab.make(ConceptKind::Direction, dir);
  p.body_parts = {part(vocab, "head"), part(vocab, "torso")};
  p.primary_body_part = p.body_parts[0];
  const float sgn = dir == "left" ? 1.f : -1.f;
  p.drives = {
      {kHead, {sgn * 0.45f, 0.f, 0.f}, {0.f, 0.f, 0.25f}, 2.f, 0.f},
      {kNeck, {sgn * 0.30f, 0.f, 0.f}, {0.f, 0.f, 0.15f}, 2.f, 0.f},
      {kChest, {sgn * 0.20f, 0.f, 0.f}, {0.f, 0.f, 0.10f}, 2.f, 0.f},
      {kSpine, {sgn * 0.10f, 0.f, 0.f}, {0.f, 0.f, 0.06f}, 2.f, 0.f},
      {kPelvis, {sgn * 0.05f, 0.f, 0.f}, {0.f, 0.f, 0.04f}, 2.f, 0.f},
  };
  return p;
}

MotionPrimitive jump(const ConceptVocabulary& vocab) {
  MotionPrimitive p;
  p.id = "jump";
  p.action = vocab.make(ConceptKind::Action, "jump");
  p.direction = vocab.make(ConceptKind::Direction, "up");
  p.body_parts = {part(vocab, "left_leg"), part(vocab, "right_leg"), part(vocab, "left_foot"),
                  part(vocab, "right_foot")};
  p.primary_body_part = p.body_parts[0];
  p.global_bump = {0.f, 0.38f, 0.f};
  for (const Side* s : {&kLeft, &kRight}) {
    p.drives.push_back({s->ankle, {0.f, 0.35f, 0.f}, {0.f, 0.15f, 0.f}, 2.f, 0.f});
    p.drives.push_back({s->knee, {0.f, 0.f, 0.10f}, {0.f, 0.30f, 0.f}, 1.f, 0.f});
    p.drives.push_back({s->hip, {0.f, 0.10f, 0.f}, {0.f, 0.12f, 0.f}, 2.f, 0.f});
  }
  return p;
}

MotionPrimitive crawl(const ConceptVocabulary& vocab) {
  MotionPrimitive p;
  p.id = "crawl";
  p.action = vocab.make(ConceptKind::Action, "crawl");
  p.direction = vocab.make(ConceptKind::Direction, "forward");
  p.body_parts = {part(vocab, "left_arm"),   part(vocab, "right_arm"), part(vocab, "left_hand"),
                  part(vocab, "right_hand"), part(vocab, "left_leg"),  part(vocab, "right_leg"),
                  part(vocab, "left_foot"),  part(vocab, "right_foot")};
  p.primary_body_part = p.body_parts[1];
  p.travel = {0.f, 0.f, 0.45f};
  for (const Side* s : {&kLeft, &kRight}) {
    const float arm_phase = (s == &kLeft) ? 0.f : static_cast<float>(kPi);
    const float leg_phase = arm_phase + static_cast<float>(kPi);
    p.drives.push_back({s->wrist, {}, {0.f, 0.12f, 0.35f}, 2.f, arm_phase});
    p.drives.push_back({s->elbow, {}, {0.f, 0.08f, 0.22f}, 2.f, arm_phase});
    p.drives.push_back({s->shoulder, {}, {0.f, 0.f, 0.12f}, 2.f, arm_phase});
    p.drives.push_back({s->ankle, {}, {0.f, 0.12f, 0.35f}, 2.f, leg_phase});
    p.drives.push_back({s->knee, {}, {0.f, 0.08f, 0.22f}, 2.f, leg_phase});
    p.drives.push_back({s->hip, {}, {0.f, 0.f, 0.12f}, 2.f, leg_phase});
  }
  return p;
}

}  // namespace

std::vector<MotionPrimitive> primitive_library(const ConceptVocabulary& vocab) {
  std::vector<MotionPrimitive> lib;
  lib.push_back(raise_arm(vocab, kLeft));
  lib.push_back(raise_arm(vocab, kRight));
  lib.push_back(kick(vocab, kLeft));
  lib.push_back(kick(vocab, kRight));
  lib.push_back(step(vocab, "left"));
  lib.push_back(step(vocab, "right"));
  lib.push_back(step(vocab, "backward"));
  lib.push_back(squat(vocab));
  lib.push_back(wave(vocab, kLeft));
  lib.push_back(wave(vocab, kRight));
  lib.push_back(turn(vocab, "left"));
  lib.push_back(turn(vocab, "right"));
  lib.push_back(jump(vocab));
  lib.push_back(crawl(vocab));
  return lib;
}

void MotionConfig::validate() const {
  if (joints != kJointCount) {
    throw ConfigError("only the fixed 17-joint skeleton is supported");
  }
  if (segments_per_seq < 2) throw ConfigError("segments_per_seq must be >= 2");
  if (min_frames_per_segment < 4 || max_frames_per_segment < min_frames_per_segment) {
    throw ConfigError("invalid frames_per_segment range");
  }
  if (noise_std < 0.f) throw ConfigError("noise_std must be >= 0");
}

void render_segment(const MotionPrimitive& primitive, int n_frames, Vec3& base, float noise_std,
                    Rng& rng, MotionFrames& out) {
  const auto& pose = neutral_pose();
  out.joint_count = kJointCount;
  for (int t = 0; t < n_frames; ++t) {
    const double u = n_frames > 1 ? static_cast<double>(t) / (n_frames - 1) : 0.0;
    for (int j = 0; j < kJointCount; ++j) {
      const Vec3 o = primitive.offset(j, u);
      float px = pose[j].x + base.x + static_cast<float>(u) * primitive.travel.x + o.x;
      float py = pose[j].y + base.y + static_cast<float>(u) * primitive.travel.y + o.y;
      float pz = pose[j].z + base.z + static_cast<float>(u) * primitive.travel.z + o.z;
      if (noise_std > 0.f) {
        px += static_cast<float>(rng.normal(0.0, noise_std));
        py += static_cast<float>(rng.normal(0.0, noise_std));
        pz += static_cast<float>(rng.normal(0.0, noise_std));
      }
      out.data.push_back(px);
      out.data.push_back(py);
      out.data.push_back(pz);
    }
  }
  out.frame_count += n_frames;
  base.x += primitive.travel.x;
  base.y += primitive.travel.y;
  base.z += primitive.travel.z;
}

MotionSequence generate_sequence(std::uint64_t rng_seed, const MotionConfig& config,
                                 const ConceptVocabulary& vocab, const std::string& id_override) {
  config.validate();
  const auto lib = primitive_library(vocab);
  Rng rng(rng_seed);

  MotionSequence seq;
  seq.id = id_override.empty() ? "m" + std::to_string(rng_seed) : id_override;
  seq.frames.joint_count = kJointCount;

  Vec3 base{};
  std::string prev_action;
  for (int s = 0; s < config.segments_per_seq; ++s) {
    size_t pick = rng.below(lib.size());
    // Avoid repeating an action back to back; keeps adjacency questions crisp.
    while (lib[pick].action.label == prev_action) pick = rng.below(lib.size());
    const auto& prim = lib[pick];
    const int n = static_cast<int>(
        rng.range(config.min_frames_per_segment, config.max_frames_per_segment));

    SegmentAnnotation ann;
    ann.start_frame = seq.frames.frame_count;
    ann.end_frame = ann.start_frame + n;
    ann.action = prim.action;
    ann.direction = prim.direction;
    ann.body_parts = prim.body_parts;
    ann.primary_body_part = prim.primary_body_part;

    render_segment(prim, n, base, config.noise_std, rng, seq.frames);
    seq.segments.push_back(std::move(ann));
    prev_action = prim.action.label;
  }
  seq.validate();
  return seq;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("truncated motion file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& out, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32(out, v);
}

float get_f32(std::istream& in) {
  const std::uint32_t v = get_u32(in);
  float f;
  std::memcpy(&f, &v, 4);
  return f;
}

}  // namespace

void write_motion(const std::string& path, const MotionSequence& seq) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write("IMOM", 4);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(seq.frames.frame_count));
  put_u32(out, static_cast<std::uint32_t>(seq.frames.joint_count));
  for (float f : seq.frames.data) put_f32(out, f);
  if (!out) throw IoError("write failed: " + path);

  nlohmann::json j;
  j["id"] = seq.id;
  j["segments"] = nlohmann::json::array();
  for (const auto& seg : seq.segments) {
    nlohmann::json s;
    s["start"] = seg.start_frame;
    s["end"] = seg.end_frame;
    s["action"] = seg.action.label;
    s["direction"] = seg.direction ? nlohmann::json(seg.direction->label) : nlohmann::json();
    s["body_parts"] = nlohmann::json::array();
    for (const auto& bp : seg.body_parts) s["body_parts"].push_back(bp.label);
    s["primary_body_part"] = seg.primary_body_part.label;
    j["segments"].push_back(std::move(s));
  }
  std::ofstream side(path + ".json");
  if (!side) throw IoError("cannot open for writing: " + path + ".json");
  side << j.dump(2) << "\n";
}

MotionSequence read_motion(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "IMOM", 4) != 0) throw FormatError("bad magic in " + path);
  const std::uint32_t version = get_u32(in);
  if (version != 1) throw FormatError("unsupported motion file version");
  const int frames = static_cast<int>(get_u32(in));
  const int joints = static_cast<int>(get_u32(in));
  if (frames <= 0 || joints <= 0) throw FormatError("bad dimensions in " + path);

  MotionSequence seq;
  seq.frames.frame_count = frames;
  seq.frames.joint_count = joints;
  seq.frames.data.reserve(static_cast<size_t>(frames) * joints * 3);
  for (int i = 0; i < frames * joints * 3; ++i) seq.frames.data.push_back(get_f32(in));

  std::ifstream side(path + ".json");
  if (!side) throw IoError("cannot open: " + path + ".json");
  nlohmann::json j;
  try {
    side >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad annotation sidecar: " + std::string(e.what()));
  }
  try {
    seq.id = j.at("id").get<std::string>();
    for (const auto& s : j.at("segments")) {
      SegmentAnnotation ann;
      ann.start_frame = s.at("start").get<int>();
      ann.end_frame = s.at("end").get<int>();
      ann.action = Concept{ConceptKind::Action, s.at("action").get<std::string>()};
      if (!s.at("direction").is_null()) {
        ann.direction = Concept{ConceptKind::Direction, s.at("direction").get<std::string>()};
      }
      for (const auto& bp : s.at("body_parts")) {
        ann.body_parts.push_back(Concept{ConceptKind::BodyPart, bp.get<std::string>()});
      }
      ann.primary_body_part =
          Concept{ConceptKind::BodyPart, s.at("primary_body_part").get<std::string>()};
      seq.segments.push_back(std::move(ann));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad annotation sidecar: " + std::string(e.what()));
  }
  seq.validate();
  return seq;
}

double mean_displacement(const MotionFrames& frames, const std::vector<int>& joints, int start,
                         int end) {
  if (end - start < 2 || joints.empty()) return 0.0;
  double total = 0.0;
  for (int t = start + 1; t < end; ++t) {
    for (int j : joints) {
      const double dx = frames.at(t, j, 0) - frames.at(t - 1, j, 0);
      const double dy = frames.at(t, j, 1) - frames.at(t - 1, j, 1);
      const double dz = frames.at(t, j, 2) - frames.at(t - 1, j, 2);
      total += std::sqrt(dx * dx + dy * dy + dz * dz);
    }
  }
  return total / (static_cast<double>(end - start - 1) * joints.size());
}

}  // namespace imore
