// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef IMORE_CHECKPOINT_HPP
#define IMORE_CHECKPOINT_HPP

#include <string>
#include <vector>

#include "imore/params.hpp"

namespace imore {

/// Named-tensor container, file layout (all integers little-endian):
///   magic "IMCK", u32 version 1, u32 meta_len, meta (UTF-8 JSON),
///   u32 tensor_count, then per tensor:
///   u32 name_len, name, u8 dtype (0=f32, 1=f64), u8 decay_flag,
///   u32 rows, u32 cols, raw values.
struct NamedTensor {
  std::string name;
  int rows = 0;
  int cols = 0;
  bool is_f64 = false;
  bool decay = false;
  std::vector<double> data;  // row-major, held as double in memory
};

struct Checkpoint {
  std::string meta_json;
  std::vector<NamedTensor> tensors;
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

template <class T>
Checkpoint registry_to_checkpoint(const ParamRegistry<T>& registry, const std::string& meta) {
  Checkpoint ck;
  ck.meta_json = meta;
  for (int i = 0; i < registry.size(); ++i) {
    const Param<T>& p = registry.at(i);
    NamedTensor t;
    t.name = p.name;
    t.rows = static_cast<int>(p.value.rows());
    t.cols = static_cast<int>(p.value.cols());
    t.is_f64 = sizeof(T) == 8;
    t.decay = p.decay;
    t.data.reserve(p.value.size());
    for (int r = 0; r < t.rows; ++r) {
      for (int c = 0; c < t.cols; ++c) t.data.push_back(static_cast<double>(p.value(r, c)));
    }
    ck.tensors.push_back(std::move(t));
  }
  return ck;
}

template <class T>
void checkpoint_into_registry(const Checkpoint& checkpoint, ParamRegistry<T>& registry) {
  for (const auto& t : checkpoint.tensors) {
    Param<T>& p = registry.at(t.name);
    if (p.value.rows() != t.rows || p.value.cols() != t.cols) {
      throw ShapeError("checkpoint tensor " + t.name + " has mismatched shape");
    }
    size_t k = 0;
    for (int r = 0; r < t.rows; ++r) {
      for (int c = 0; c < t.cols; ++c) p.value(r, c) = static_cast<T>(t.data[k++]);
    }
  }
}

}  // namespace imore

#endif
