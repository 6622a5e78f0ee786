// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#include "imore/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "imore/errors.hpp"

namespace imore {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("truncated checkpoint");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

std::uint64_t get_u64(std::istream& in) {
  const std::uint64_t lo = get_u32(in);
  const std::uint64_t hi = get_u32(in);
  return lo | (hi << 32);
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write("IMCK", 4);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(checkpoint.meta_json.size()));
  out.write(checkpoint.meta_json.data(),
            static_cast<std::streamsize>(checkpoint.meta_json.size()));
  put_u32(out, static_cast<std::uint32_t>(checkpoint.tensors.size()));
  for (const auto& t : checkpoint.tensors) {
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    out.put(t.is_f64 ? 1 : 0);
    out.put(t.decay ? 1 : 0);
    put_u32(out, static_cast<std::uint32_t>(t.rows));
    put_u32(out, static_cast<std::uint32_t>(t.cols));
    for (double d : t.data) {
      if (t.is_f64) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, 8);
        put_u64(out, bits);
      } else {
        const float f = static_cast<float>(d);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(out, bits);
      }
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "IMCK", 4) != 0) throw FormatError("bad checkpoint magic");
  if (get_u32(in) != 1) throw FormatError("unsupported checkpoint version");

  Checkpoint ck;
  const std::uint32_t meta_len = get_u32(in);
  ck.meta_json.resize(meta_len);
  in.read(ck.meta_json.data(), meta_len);
  if (!in) throw FormatError("truncated checkpoint");

  const std::uint32_t count = get_u32(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    const std::uint32_t name_len = get_u32(in);
    t.name.resize(name_len);
    in.read(t.name.data(), name_len);
    const int dtype = in.get();
    const int decay = in.get();
    if (!in || (dtype != 0 && dtype != 1)) throw FormatError("bad tensor header");
    t.is_f64 = dtype == 1;
    t.decay = decay != 0;
    t.rows = static_cast<int>(get_u32(in));
    t.cols = static_cast<int>(get_u32(in));
    t.data.reserve(static_cast<size_t>(t.rows) * t.cols);
    for (long long k = 0; k < static_cast<long long>(t.rows) * t.cols; ++k) {
      if (t.is_f64) {
        const std::uint64_t bits = get_u64(in);
        double d;
        std::memcpy(&d, &bits, 8);
        t.data.push_back(d);
      } else {
        const std::uint32_t bits = get_u32(in);
        float f;
        std::memcpy(&f, &bits, 4);
        t.data.push_back(static_cast<double>(f));
      }
    }
    ck.tensors.push_back(std::move(t));
  }
  return ck;
}

}  // namespace imore
