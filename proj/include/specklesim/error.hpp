// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace specklesim {

enum class ErrorKind {
  usage,        // bad arguments or configuration
  format,       // malformed file contents
  metadata,     // sidecar or job metadata incomplete
  io,           // file missing or unwritable
  geometry,     // degenerate or self-intersecting mesh
  containment,  // point not inside the cell it was solved against
  metric,       // undefined or mismatched evaluation inputs
};

const char* to_string(ErrorKind kind);

// Single exception type for the library. `stage` names the pipeline step
// that raised it so batch logs can be traced back ("load_tensor", "s2/measure", ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }

  // Prefix an outer stage label, keeping kind and message.
  Error relabel(const std::string& outer) const;

 private:
  ErrorKind kind_;
  std::string stage_;
  std::string message_;
};

}  // namespace specklesim
