// Copyright 2026 The TempoWiC-MoE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "tempowic/core.hpp"

// Checkpoint directory layout:
//   manifest   - JSON: format, dtype, per-parameter name/shape/offset, config
//                snapshot, metrics
//   params.bin - little-endian float32 values, parameters in manifest order,
//                each stored row-major
namespace tempowic {

inline constexpr const char* kManifestName = "manifest";
inline constexpr const char* kPayloadName = "params.bin";
inline constexpr const char* kCheckpointFormat = "tempowic-checkpoint-v1";

namespace detail {

inline void put_f32(std::string& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
}

inline float get_f32(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(p[k]) << (8 * k);
  return std::bit_cast<float>(bits);
}

}  // namespace detail

template <typename T>
void save_checkpoint(const std::filesystem::path& dir, const ParamList<T>& params, const nlohmann::json& config,
                     const nlohmann::json& metrics = nlohmann::json::object()) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format"] = kCheckpointFormat;
  manifest["dtype"] = "float32";
  manifest["byte_order"] = "little";
  auto& entries = manifest["params"] = nlohmann::ordered_json::array();
  std::string payload;
  for (const auto* p : params) {
    nlohmann::ordered_json e;
    e["name"] = p->name;
    e["shape"] = {p->value.rows(), p->value.cols()};
    e["offset"] = payload.size();
    entries.push_back(e);
    for (Eigen::Index i = 0; i < p->value.size(); ++i) detail::put_f32(payload, static_cast<float>(p->value.data()[i]));
  }
  manifest["config"] = config;
  manifest["metrics"] = metrics;

  std::ofstream m(dir / kManifestName, std::ios::binary | std::ios::trunc);
  if (!m) throw DataError("cannot write " + (dir / kManifestName).string());
  m << manifest.dump(2) << '\n';
  std::ofstream b(dir / kPayloadName, std::ios::binary | std::ios::trunc);
  if (!b) throw DataError("cannot write " + (dir / kPayloadName).string());
  b.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!m || !b) throw DataError("checkpoint write failed in " + dir.string());
}

inline nlohmann::json read_manifest(const std::filesystem::path& dir) {
  std::ifstream m(dir / kManifestName, std::ios::binary);
  if (!m) throw DataError("cannot open checkpoint manifest in " + dir.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(m);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("malformed checkpoint manifest: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != kCheckpointFormat)
    throw DataError("unrecognized checkpoint format in " + dir.string());
  return manifest;
}

// Loads values into `params`, which must match the manifest by name, order
// and shape. Any mismatch is reported with every offending parameter name.
template <typename T>
nlohmann::json load_checkpoint(const std::filesystem::path& dir, const ParamList<T>& params) {
  const nlohmann::json manifest = read_manifest(dir);
  const auto& entries = manifest.at("params");

  std::vector<std::string> problems;
  const std::size_t n = std::max(entries.size(), params.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= entries.size()) {
      problems.push_back(params[i]->name + " (missing from manifest)");
      continue;
    }
    const std::string name = entries[i].at("name").get<std::string>();
    if (i >= params.size()) {
      problems.push_back(name + " (not in model)");
      continue;
    }
    const auto& p = *params[i];
    const auto shape = entries[i].at("shape");
    if (name != p.name) {
      problems.push_back(name + " (model expects " + p.name + ")");
    } else if (shape.at(0).get<Eigen::Index>() != p.value.rows() || shape.at(1).get<Eigen::Index>() != p.value.cols()) {
      problems.push_back(name + " (shape " + shape.dump() + " vs model [" + std::to_string(p.value.rows()) + "," +
                         std::to_string(p.value.cols()) + "])");
    }
  }
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s;
  };
  if (!problems.empty()) throw DataError("checkpoint manifest does not match model: " + join(problems));

  std::ifstream b(dir / kPayloadName, std::ios::binary);
  if (!b) throw DataError("cannot open " + (dir / kPayloadName).string());
  const std::string payload((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  std::size_t expected = 0;
  std::vector<std::string> truncated;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto offset = entries[i].at("offset").get<std::size_t>();
    const std::size_t bytes = static_cast<std::size_t>(params[i]->value.size()) * 4;
    if (offset != expected) throw DataError("checkpoint offset mismatch at " + params[i]->name);
    if (offset + bytes > payload.size()) truncated.push_back(params[i]->name);
    expected += bytes;
  }
  if (!truncated.empty()) throw DataError("params.bin truncated; incomplete parameters: " + join(truncated));
  if (payload.size() != expected)
    throw DataError("params.bin has " + std::to_string(payload.size() - expected) + " trailing bytes");

  const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& v = params[i]->value;
    const auto offset = entries[i].at("offset").get<std::size_t>();
    for (Eigen::Index k = 0; k < v.size(); ++k)
      v.data()[k] = static_cast<T>(detail::get_f32(bytes + offset + 4 * static_cast<std::size_t>(k)));
  }
  return manifest;
}

}  // namespace tempowic
