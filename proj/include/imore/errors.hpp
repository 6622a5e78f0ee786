// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef IMORE_ERRORS_HPP
#define IMORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace imore {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Program DSL
struct SyntaxError : Error { using Error::Error; };
struct UnknownConceptError : Error { using Error::Error; };
struct AmbiguousConceptError : Error { using Error::Error; };
struct ArityError : Error { using Error::Error; };
struct UnknownFunctionError : Error { using Error::Error; };
struct EmptyVocabularyError : Error { using Error::Error; };

// Files / config
struct IoError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// Dataset
struct QuotaUnreachableError : Error { using Error::Error; };
struct UnparsableQuestionError : Error { using Error::Error; };
struct MissingMotionError : Error { using Error::Error; };

// Numerics
struct ShapeError : Error { using Error::Error; };
struct NonFiniteValueError : Error { using Error::Error; };
struct DivergenceError : Error { using Error::Error; };

}  // namespace imore

#endif
