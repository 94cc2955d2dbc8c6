// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#include "specklesim/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"

#include "specklesim/error.hpp"

namespace specklesim {
namespace {

constexpr std::array<char, 8> kMagic = {'T', '3', '2', 'T', 'E', 'N', 'S', '\0'};

static_assert(std::endian::native == std::endian::little,
              "t32 I/O assumes a little-endian host");

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

}  // namespace

std::size_t RawTensor::element_count() const {
  if (dims.empty()) return 0;
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

void VideoTensor::validate() const {
  if (frames_ < 2) {
    throw Error(ErrorKind::format, "video", "need at least 2 frames, got " + std::to_string(frames_));
  }
  if (height_ == 0 || width_ == 0) throw Error(ErrorKind::format, "video", "empty frame");
  if (metadata_.es_index >= frames_) {
    throw Error(ErrorKind::metadata, "video",
                "es_index " + std::to_string(metadata_.es_index) + " outside [0, " +
                    std::to_string(frames_) + ")");
  }
  if (!(metadata_.spacing.axial_mm > 0.0) || !(metadata_.spacing.lateral_mm > 0.0)) {
    throw Error(ErrorKind::metadata, "video", "pixel spacing must be positive");
  }
  for (float v : data_) {
    if (!(v >= 0.0f && v <= 1.0f)) throw Error(ErrorKind::format, "video", "intensity outside [0,1]");
  }
}

RawTensor read_t32(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "load_tensor", "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());

  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw Error(ErrorKind::format, "load_tensor", "bad magic in " + path.string());
  }
  const std::uint32_t ndim = get_u32(p + 8);
  if (ndim == 0 || ndim > 16 || bytes.size() < 12 + 4 * std::size_t{ndim}) {
    throw Error(ErrorKind::format, "load_tensor", "bad dimension header in " + path.string());
  }
  RawTensor tensor;
  for (std::uint32_t d = 0; d < ndim; ++d) tensor.dims.push_back(get_u32(p + 12 + 4 * d));

  const std::size_t header = 12 + 4 * std::size_t{ndim};
  const std::size_t count = tensor.element_count();
  if (bytes.size() != header + 4 * count) {
    throw Error(ErrorKind::format, "load_tensor",
                "payload holds " + std::to_string(bytes.size() - header) + " bytes, dims imply " +
                    std::to_string(4 * count) + " in " + path.string());
  }
  tensor.data.resize(count);
  std::memcpy(tensor.data.data(), bytes.data() + header, 4 * count);
  return tensor;
}

void write_t32(const std::filesystem::path& path, const RawTensor& tensor) {
  if (tensor.data.size() != tensor.element_count()) {
    throw Error(ErrorKind::format, "save_tensor", "payload size does not match dims");
  }
  std::string header(kMagic.begin(), kMagic.end());
  put_u32(header, static_cast<std::uint32_t>(tensor.dims.size()));
  for (auto d : tensor.dims) put_u32(header, d);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "save_tensor", "cannot write " + path.string());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(tensor.data.data()),
            static_cast<std::streamsize>(4 * tensor.data.size()));
  if (!out) throw Error(ErrorKind::io, "save_tensor", "short write to " + path.string());
}

std::filesystem::path sidecar_path(const std::filesystem::path& tensor_path) {
  auto p = tensor_path;
  p.replace_extension(".json");
  return p;
}

VideoMetadata read_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::metadata, "load_tensor", "missing sidecar " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::metadata, "load_tensor", "unparsable sidecar " + path.string() + ": " + e.what());
  }
  VideoMetadata meta;
  try {
    const auto& spacing = j.at("pixel_spacing_mm");
    if (!spacing.is_array() || spacing.size() != 2) {
      throw Error(ErrorKind::metadata, "load_tensor", "pixel_spacing_mm must be [axial, lateral]");
    }
    meta.spacing = {spacing[0].get<double>(), spacing[1].get<double>()};
    const auto es = j.at("es_index").get<long long>();
    if (es < 0) throw Error(ErrorKind::metadata, "load_tensor", "es_index must be non-negative");
    meta.es_index = static_cast<std::size_t>(es);
    meta.fps = j.at("fps").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::metadata, "load_tensor", "sidecar " + path.string() + ": " + e.what());
  }
  return meta;
}

void write_sidecar(const std::filesystem::path& path, const VideoMetadata& metadata) {
  nlohmann::json j;
  j["pixel_spacing_mm"] = {metadata.spacing.axial_mm, metadata.spacing.lateral_mm};
  j["es_index"] = metadata.es_index;
  j["fps"] = metadata.fps;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "save_tensor", "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

VideoTensor load_tensor(const std::filesystem::path& path) {
  RawTensor raw = read_t32(path);
  if (raw.dims.size() != 3) {
    throw Error(ErrorKind::format, "load_tensor",
                "expected 3 dims (T,H,W), got " + std::to_string(raw.dims.size()));
  }
  VideoMetadata meta = read_sidecar(sidecar_path(path));
  VideoTensor video(raw.dims[0], raw.dims[1], raw.dims[2], meta);
  auto out = video.data();
  for (std::size_t k = 0; k < raw.data.size(); ++k) {
    const float v = raw.data[k];
    // NaN maps to 0 so the clamp contract holds for every stored value.
    out[k] = v >= 0.0f ? std::min(v, 1.0f) : 0.0f;
  }
  video.validate();
  return video;
}

RawTensor to_raw(const VideoTensor& video) {
  RawTensor raw;
  raw.dims = {static_cast<std::uint32_t>(video.frames()), static_cast<std::uint32_t>(video.height()),
              static_cast<std::uint32_t>(video.width())};
  raw.data.assign(video.data().begin(), video.data().end());
  return raw;
}

void save_tensor(const std::filesystem::path& path, const VideoTensor& video) {
  write_t32(path, to_raw(video));
  write_sidecar(sidecar_path(path), video.metadata());
}

}  // namespace specklesim
