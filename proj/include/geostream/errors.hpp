// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace geostream {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonPositiveDepth : public Error {
 public:
  explicit NonPositiveDepth(double z)
      : Error("non-positive depth: " + std::to_string(z)), depth(z) {}
  double depth;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class EmptyPatch : public Error {
 public:
  EmptyPatch() : Error("patch has no valid pixel") {}
};

class EmptyRoi : public Error {
 public:
  EmptyRoi() : Error("corner field has no pixel") {}
};

enum class Axis { length = 0, width = 1, height = 2 };

inline const char* axis_name(Axis a) {
  switch (a) {
    case Axis::length: return "length";
    case Axis::width: return "width";
    case Axis::height: return "height";
  }
  return "?";
}

// Raised when an axis' 2x2 normal system is singular. When the prior term is
// active the dimension itself is still determined; it is carried here.
class InsufficientConstraints : public Error {
 public:
  InsufficientConstraints(Axis a, double det, double prior_dim)
      : Error(std::string("insufficient constraints on ") + axis_name(a) +
              " axis (det=" + std::to_string(det) + ")"),
        axis(a),
        determinant(det),
        dimension(prior_dim) {}
  Axis axis;
  double determinant;
  double dimension;
};

class DegenerateEdge : public Error {
 public:
  explicit DegenerateEdge(double det)
      : Error("degenerate BEV edge (det=" + std::to_string(det) + ")"),
        determinant(det) {}
  double determinant;
};

class NonPositiveUncertainty : public Error {
 public:
  explicit NonPositiveUncertainty(double u)
      : Error("uncertainty must be positive: " + std::to_string(u)) {}
};

class ExhaustedSampling : public Error {
 public:
  explicit ExhaustedSampling(int attempts)
      : Error("scene sampling exhausted after " + std::to_string(attempts) +
              " attempts"),
        attempts(attempts) {}
  int attempts;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace geostream
