// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace specklesim {

// Dense row-major 2D grid. Row index is depth (z), column index is lateral (x).
template <typename T>
class Image {
 public:
  Image() = default;
  Image(std::size_t height, std::size_t width, T fill = T{})
      : height_(height), width_(width), data_(height * width, fill) {}

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& at(std::size_t z, std::size_t x) { return data_[z * width_ + x]; }
  const T& at(std::size_t z, std::size_t x) const { return data_[z * width_ + x]; }

  bool contains(long z, long x) const noexcept {
    return z >= 0 && x >= 0 && z < static_cast<long>(height_) && x < static_cast<long>(width_);
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> data_;
};

using Mask = Image<std::uint8_t>;

// Read-only strided view of a float plane; lets correlation code work on a
// frame of a video or on a standalone Image without copies.
struct PlaneView {
  const float* data = nullptr;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t stride = 0;

  float at(std::size_t z, std::size_t x) const { return data[z * stride + x]; }

  static PlaneView of(const Image<float>& image) {
    return {image.data().data(), image.height(), image.width(), image.width()};
  }
};

struct PixelSpacing {
  double axial_mm = 1.0;
  double lateral_mm = 1.0;
};

struct VideoMetadata {
  PixelSpacing spacing;
  std::size_t es_index = 0;
  double fps = 30.0;
};

// T x H x W intensity sequence stored (t, z, x) row-major.
class VideoTensor {
 public:
  VideoTensor() = default;
  VideoTensor(std::size_t frames, std::size_t height, std::size_t width,
              VideoMetadata metadata = {}, float fill = 0.0f)
      : frames_(frames),
        height_(height),
        width_(width),
        metadata_(metadata),
        data_(frames * height * width, fill) {}

  std::size_t frames() const noexcept { return frames_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t frame_size() const noexcept { return height_ * width_; }

  float& at(std::size_t t, std::size_t z, std::size_t x) {
    return data_[(t * height_ + z) * width_ + x];
  }
  float at(std::size_t t, std::size_t z, std::size_t x) const {
    return data_[(t * height_ + z) * width_ + x];
  }

  std::span<float> frame(std::size_t t) { return {data_.data() + t * frame_size(), frame_size()}; }
  std::span<const float> frame(std::size_t t) const {
    return {data_.data() + t * frame_size(), frame_size()};
  }
  PlaneView view(std::size_t t) const {
    return {data_.data() + t * frame_size(), height_, width_, width_};
  }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  const VideoMetadata& metadata() const noexcept { return metadata_; }
  VideoMetadata& metadata() noexcept { return metadata_; }

  void clamp_unit() {
    for (auto& v : data_) v = std::clamp(v, 0.0f, 1.0f);
  }

  // Throws metadata/format errors when T < 2, es_index out of range or values leave [0,1].
  void validate() const;

 private:
  std::size_t frames_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  VideoMetadata metadata_;
  std::vector<float> data_;
};

// Untyped N-dimensional float32 payload, the in-memory image of a .t32 file.
struct RawTensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t element_count() const;
};

}  // namespace specklesim
