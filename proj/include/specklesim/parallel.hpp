// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace specklesim {

// Worker count for the OpenMP loops in this library. 0 restores the
// default (hardware concurrency). Every parallel loop writes to disjoint
// output slots, so results do not depend on this setting.
void set_thread_count(int threads);
int thread_count();

}  // namespace specklesim
