// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "specklesim/tensor.hpp"

namespace specklesim {

// .t32 container: "T32TENS\0", u32 ndim, ndim x u32 dims, float32 payload.
// All integers and floats little-endian.
RawTensor read_t32(const std::filesystem::path& path);
void write_t32(const std::filesystem::path& path, const RawTensor& tensor);

// Sidecar lives next to the tensor with the extension replaced by .json.
std::filesystem::path sidecar_path(const std::filesystem::path& tensor_path);

VideoMetadata read_sidecar(const std::filesystem::path& path);
void write_sidecar(const std::filesystem::path& path, const VideoMetadata& metadata);

// Loads a 3D .t32 plus sidecar; intensities are clamped to [0,1].
VideoTensor load_tensor(const std::filesystem::path& path);
void save_tensor(const std::filesystem::path& path, const VideoTensor& video);

RawTensor to_raw(const VideoTensor& video);

}  // namespace specklesim
