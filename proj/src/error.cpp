// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#include "specklesim/error.hpp"

namespace specklesim {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return "usage error";
    case ErrorKind::format: return "format error";
    case ErrorKind::metadata: return "metadata error";
    case ErrorKind::io: return "io error";
    case ErrorKind::geometry: return "geometry error";
    case ErrorKind::containment: return "containment error";
    case ErrorKind::metric: return "metric error";
  }
  return "error";
}

Error::Error(ErrorKind kind, std::string stage, const std::string& message)
    : std::runtime_error("[" + stage + "] " + to_string(kind) + ": " + message),
      kind_(kind),
      stage_(std::move(stage)),
      message_(message) {}

Error Error::relabel(const std::string& outer) const {
  return Error(kind_, outer + "/" + stage_, message_);
}

}  // namespace specklesim
