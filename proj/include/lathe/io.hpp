// Copyright 2026 The Lathe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Files on disk.
//
// PFM: little-endian (negative scale), 32-bit floats, rows stored bottom to
// top. PNG: 8 bit with an sRGB chunk; values are written as they are, with
// no transfer function applied. JSON documents carry a "version" field.

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "lathe/derender.hpp"
#include "lathe/losses.hpp"
#include "lathe/synth.hpp"

namespace lathe {

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file was readable but its contents are malformed. For JSON the message
/// starts with the offending field path, e.g. "pose.pitch: expected number".
class FormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kSceneFileVersion = 1;
inline constexpr int kDecompositionFileVersion = 1;
inline constexpr int kConfigFileVersion = 1;

// ---------------------------------------------------------------- rasters

void write_pfm(const std::filesystem::path& path, const ScalarMap& map);
void write_pfm(const std::filesystem::path& path, const ColorMap& map);
/// Throws FormatError unless the file has one channel ("Pf").
ScalarMap read_pfm_scalar(const std::filesystem::path& path);
/// Throws FormatError unless the file has three channels ("PF").
ColorMap read_pfm_color(const std::filesystem::path& path);

/// Values are clamped to [0, 1] and rounded to 8 bits.
void write_png(const std::filesystem::path& path, const ColorMap& image);
void write_png(const std::filesystem::path& path, const ScalarMap& grey);
/// Any 8- or 16-bit PNG; grey is replicated, alpha dropped.
ColorMap read_png_color(const std::filesystem::path& path);
/// Grey images directly; colour images by their first channel.
ScalarMap read_png_grey(const std::filesystem::path& path);

/// The value an 8-bit PNG round trip gives back.
double quantize8(double v);

// ---------------------------------------------------------------- JSON

nlohmann::json to_json(const LossWeights& weights);
nlohmann::json to_json(const OptimizerConfig& config);
nlohmann::json to_json(const SynthConfig& config);
nlohmann::json to_json(const RadiusProfile& profile);
nlohmann::json to_json(const CameraPose& pose);

/// Missing fields keep the defaults of `base`; unknown fields are errors.
LossWeights loss_weights_from_json(const nlohmann::json& j, const LossWeights& base = {});
OptimizerConfig optimizer_config_from_json(const nlohmann::json& j, const OptimizerConfig& base = {});
SynthConfig synth_config_from_json(const nlohmann::json& j, const SynthConfig& base = {});
RadiusProfile profile_from_json(const nlohmann::json& j);
CameraPose pose_from_json(const nlohmann::json& j);

/// Combined run configuration: {"version", "weights", "optimizer"}.
struct RunConfig {
  LossWeights weights;
  OptimizerConfig optimizer;
};
nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);

/// FNV-1a of the compact JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& config);

nlohmann::json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

// ---------------------------------------------------------------- scenes

/// Names of the files making up a scene directory.
struct SceneFiles {
  static constexpr const char* kScene = "scene.json";
  static constexpr const char* kImage = "image.png";
  static constexpr const char* kMask = "mask.png";
  static constexpr const char* kAlbedo = "albedo.pfm";  ///< frontal band
  static constexpr const char* kAlbedoFull = "albedo_full.pfm";
  static constexpr const char* kEnv = "env.pfm";  ///< light intensities
  static constexpr const char* kNormals = "normals.pfm";
  static constexpr const char* kDiffuse = "i_d.pfm";
  static constexpr const char* kSpecular = "i_s.pfm";
};

/// scene.json: version, generator version, seed, synth config, profile,
/// pose, shininess, specular albedo, lobes and the map file names.
nlohmann::json scene_to_json(const Scene& scene, const SynthConfig& config);

struct LoadedScene {
  Scene scene;
  SynthConfig config;
};

/// Reads scene.json and the albedo_full.pfm and env.pfm it names (relative
/// to its directory).
LoadedScene load_scene(const std::filesystem::path& scene_json);

/// Writes every file of a generated scene into `dir`, which must exist.
void save_scene(const std::filesystem::path& dir, const GeneratedScene& generated, const SynthConfig& config);

}  // namespace lathe
