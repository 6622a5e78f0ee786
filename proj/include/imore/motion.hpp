// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef IMORE_MOTION_HPP
#define IMORE_MOTION_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "imore/concepts.hpp"
#include "imore/rng.hpp"

namespace imore {

// Fixed 17-joint skeleton. +x is the person's left, +y up, +z forward.
constexpr int kJointCount = 17;

enum Joint : int {
  kPelvis = 0, kSpine, kChest, kNeck, kHead,
  kLeftShoulder, kLeftElbow, kLeftWrist,
  kRightShoulder, kRightElbow, kRightWrist,
  kLeftHip, kLeftKnee, kLeftAnkle,
  kRightHip, kRightKnee, kRightAnkle,
};

struct Vec3 {
  float x = 0.f, y = 0.f, z = 0.f;
};

/// Neutral standing pose, meters.
const std::array<Vec3, kJointCount>& neutral_pose();

/// Joints covered by a body-part label (wrist stands in for the hand,
/// ankle for the foot).
const std::vector<int>& joints_of_body_part(const std::string& label);

/// The six patch groups the motion encoder tokenizes over.
struct PatchGroup {
  std::string name;
  std::vector<int> joints;
};
const std::vector<PatchGroup>& patch_groups();

struct SegmentAnnotation {
  int start_frame = 0;
  int end_frame = 0;  // exclusive
  Concept action;
  std::optional<Concept> direction;
  std::vector<Concept> body_parts;  // non-empty
  Concept primary_body_part;        // member of body_parts
};

struct MotionFrames {
  int frame_count = 0;
  int joint_count = 0;
  std::vector<float> data;  // (frame, joint, axis), row-major

  float& at(int t, int j, int axis) { return data[(t * joint_count + j) * 3 + axis]; }
  float at(int t, int j, int axis) const { return data[(t * joint_count + j) * 3 + axis]; }
};

struct MotionSequence {
  std::string id;
  MotionFrames frames;
  std::vector<SegmentAnnotation> segments;  // contiguous, covering [0, T)

  int frame_count() const { return frames.frame_count; }
  /// Throws FormatError if structural invariants are violated.
  void validate() const;
};

/// A parametric segment generator: per-joint bump/oscillation drives plus a
/// whole-body bump and a net travel ramp.
struct MotionPrimitive {
  std::string id;
  Concept action;
  std::optional<Concept> direction;
  std::vector<Concept> body_parts;
  Concept primary_body_part;
  Vec3 travel;       // net whole-body translation across the segment
  Vec3 global_bump;  // whole-body sin(pi*u) excursion (jumps)

  struct Drive {
    int joint;
    Vec3 bump;        // amplitude of sin(pi*u)
    Vec3 osc;         // amplitude of sin(2*pi*cycles*u + phase)
    float cycles = 0.f;
    float phase = 0.f;
  };
  std::vector<Drive> drives;

  /// Offset from (neutral + accumulated base) at phase u in [0,1].
  Vec3 offset(int joint, double u) const;
};

/// >= 8 actions spanning every direction label and all ten body-part labels.
/// The vocabulary must contain the stock labels (see default_vocabulary()).
std::vector<MotionPrimitive> primitive_library(const ConceptVocabulary& vocab);

struct MotionConfig {
  int joints = kJointCount;
  int segments_per_seq = 3;
  int min_frames_per_segment = 16;
  int max_frames_per_segment = 24;
  float noise_std = 0.01f;

  void validate() const;  // throws ConfigError
};

/// Renders one segment of a primitive on top of `base` (accumulated
/// translation), appending frames and advancing base by the travel.
void render_segment(const MotionPrimitive& primitive, int n_frames, Vec3& base, float noise_std,
                    Rng& rng, MotionFrames& out);

MotionSequence generate_sequence(std::uint64_t rng_seed, const MotionConfig& config,
                                 const ConceptVocabulary& vocab,
                                 const std::string& id_override = "");

/// Binary motion file: magic "IMOM", u32 version 1, i32 T, i32 J, then
/// T*J*3 little-endian float32. Annotations go to <path>.json.
void write_motion(const std::string& path, const MotionSequence& seq);
MotionSequence read_motion(const std::string& path);

/// Mean per-frame displacement of a joint set over a frame span.
double mean_displacement(const MotionFrames& frames, const std::vector<int>& joints, int start,
                         int end);

}  // namespace imore

#endif
