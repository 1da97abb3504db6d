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

#include "lathe/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <vector>

#include <png.h>

namespace lathe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- PFM

void write_pfm_floats(const fs::path& path, int rows, int cols, int channels, const std::vector<float>& top_down) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << (channels == 3 ? "PF" : "Pf") << '\n' << cols << ' ' << rows << '\n' << "-1.0\n";
  const std::size_t row_len = static_cast<std::size_t>(cols) * channels;
  for (int r = rows - 1; r >= 0; --r) {
    const float* row = top_down.data() + static_cast<std::size_t>(r) * row_len;
    if constexpr (std::endian::native == std::endian::little) {
      out.write(reinterpret_cast<const char*>(row), static_cast<std::streamsize>(row_len * sizeof(float)));
    } else {
      for (std::size_t i = 0; i < row_len; ++i) {
        const auto b = __builtin_bswap32(std::bit_cast<std::uint32_t>(row[i]));
        out.write(reinterpret_cast<const char*>(&b), sizeof b);
      }
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

struct PfmData {
  int rows = 0, cols = 0, channels = 0;
  std::vector<float> top_down;
};

PfmData read_pfm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  PfmData d;
  double scale = 0.0;
  in >> magic >> d.cols >> d.rows >> scale;
  if (!in) throw FormatError(path.string() + ": truncated PFM header");
  if (magic == "PF")
    d.channels = 3;
  else if (magic == "Pf")
    d.channels = 1;
  else
    throw FormatError(path.string() + ": not a PFM file");
  if (d.rows <= 0 || d.cols <= 0 || scale == 0.0) throw FormatError(path.string() + ": bad PFM header");
  in.get();  // single whitespace byte before the raster
  const bool little = scale < 0.0;
  const std::size_t row_len = static_cast<std::size_t>(d.cols) * d.channels;
  d.top_down.resize(row_len * d.rows);
  for (int r = d.rows - 1; r >= 0; --r) {
    float* row = d.top_down.data() + static_cast<std::size_t>(r) * row_len;
    in.read(reinterpret_cast<char*>(row), static_cast<std::streamsize>(row_len * sizeof(float)));
    if (!in) throw FormatError(path.string() + ": truncated PFM raster");
    if (little != (std::endian::native == std::endian::little))
      for (std::size_t i = 0; i < row_len; ++i)
        row[i] = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<std::uint32_t>(row[i])));
  }
  return d;
}

// ---------------------------------------------------------------- PNG

std::uint8_t to_byte(double v) {
  if (!(v > 0.0)) return 0;  // also NaN
  if (v >= 1.0) return 255;
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

void write_png_bytes(const fs::path& path, int rows, int cols, int channels, const std::vector<std::uint8_t>& px) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(cols);
  image.height = static_cast<png_uint_32>(rows);
  image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  // 8-bit non-linear formats are tagged sRGB by libpng.
  if (!png_image_write_to_file(&image, path.c_str(), 0, px.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot write " + path.string() + ": " + msg);
  }
}

std::vector<std::uint8_t> read_png_bytes(const fs::path& path, int channels, int& rows, int& cols) {
  if (!fs::exists(path)) throw IoError("cannot open " + path.string());
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw FormatError(path.string() + ": " + image.message);
  image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, px.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw FormatError(path.string() + ": " + msg);
  }
  rows = static_cast<int>(image.height);
  cols = static_cast<int>(image.width);
  return px;
}

// ---------------------------------------------------------------- JSON fields

class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "(root)" : path_, "expected object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw FormatError(where + ": " + what);
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) const {
    if (!j_.contains(key)) fail(at(key), "missing");
    return j_.at(key);
  }

  void get(const char* key, double& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(at(key), "expected number");
    out = v.get<double>();
  }
  void get(const char* key, int& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(at(key), "expected integer");
    out = v.get<int>();
  }
  void get(const char* key, std::uint64_t& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) fail(at(key), "expected non-negative integer");
    out = v.get<std::uint64_t>();
  }
  void get(const char* key, bool& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(at(key), "expected boolean");
    out = v.get<bool>();
  }
  void get(const char* key, std::string& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(at(key), "expected string");
    out = v.get<std::string>();
  }
  void get(const char* key, std::vector<double>& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(at(key), "expected array");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(at(key) + "[" + std::to_string(i) + "]", "expected number");
      out.push_back(v[i].get<double>());
    }
  }

  template <class T>
  void require(const char* key, T& out) const {
    if (!has(key)) fail(at(key), "missing");
    get(key, out);
  }

  void only(std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : j_.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* allowed) { return k == allowed; }))
        fail(at(k), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
};

void check_version(const Fields& f, int supported) {
  int version = 0;
  f.require("version", version);
  if (version != supported)
    Fields::fail(f.at("version"), "unsupported version " + std::to_string(version));
}

Vec3 vec3_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) Fields::fail(where, "expected array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) Fields::fail(where + "[" + std::to_string(i) + "]", "expected number");
    v[i] = j[i].get<double>();
  }
  return v;
}

template <class F>
auto wrap_validation(F&& f) {
  try {
    return f();
  } catch (const FormatError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------- rasters

void write_pfm(const fs::path& path, const ScalarMap& map) {
  std::vector<float> v(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) v[i] = static_cast<float>(map[i]);
  write_pfm_floats(path, map.rows(), map.cols(), 1, v);
}

void write_pfm(const fs::path& path, const ColorMap& map) {
  std::vector<float> v(map.size() * 3);
  for (std::size_t i = 0; i < map.size(); ++i)
    for (int c = 0; c < 3; ++c) v[3 * i + c] = static_cast<float>(map[i][c]);
  write_pfm_floats(path, map.rows(), map.cols(), 3, v);
}

ScalarMap read_pfm_scalar(const fs::path& path) {
  const PfmData d = read_pfm(path);
  if (d.channels != 1) throw FormatError(path.string() + ": expected a one-channel PFM");
  ScalarMap out(d.rows, d.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = d.top_down[i];
  return out;
}

ColorMap read_pfm_color(const fs::path& path) {
  const PfmData d = read_pfm(path);
  if (d.channels != 3) throw FormatError(path.string() + ": expected a three-channel PFM");
  ColorMap out(d.rows, d.cols);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = Color(d.top_down[3 * i], d.top_down[3 * i + 1], d.top_down[3 * i + 2]);
  return out;
}

double quantize8(double v) { return to_byte(v) / 255.0; }

void write_png(const fs::path& path, const ColorMap& image) {
  std::vector<std::uint8_t> px(image.size() * 3);
  for (std::size_t i = 0; i < image.size(); ++i)
    for (int c = 0; c < 3; ++c) px[3 * i + c] = to_byte(image[i][c]);
  write_png_bytes(path, image.rows(), image.cols(), 3, px);
}

void write_png(const fs::path& path, const ScalarMap& grey) {
  std::vector<std::uint8_t> px(grey.size());
  for (std::size_t i = 0; i < grey.size(); ++i) px[i] = to_byte(grey[i]);
  write_png_bytes(path, grey.rows(), grey.cols(), 1, px);
}

ColorMap read_png_color(const fs::path& path) {
  int rows = 0, cols = 0;
  const auto px = read_png_bytes(path, 3, rows, cols);
  ColorMap out(rows, cols);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Color(px[3 * i], px[3 * i + 1], px[3 * i + 2]) / 255.0;
  return out;
}

ScalarMap read_png_grey(const fs::path& path) {
  int rows = 0, cols = 0;
  const auto px = read_png_bytes(path, 1, rows, cols);
  ScalarMap out(rows, cols);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = px[i] / 255.0;
  return out;
}

// ---------------------------------------------------------------- JSON

json to_json(const LossWeights& w) {
  return {{"silhouette", w.silhouette}, {"distance", w.distance},      {"image", w.image},
          {"albedo", w.albedo},         {"sad", w.sad},                {"diffuse", w.diffuse},
          {"diffuse_target", w.diffuse_target}, {"diffuse_margin", w.diffuse_margin}};
}

LossWeights loss_weights_from_json(const json& j, const LossWeights& base) {
  const Fields f(j, "weights");
  f.only({"silhouette", "distance", "image", "albedo", "sad", "diffuse", "diffuse_target", "diffuse_margin"});
  LossWeights w = base;
  f.get("silhouette", w.silhouette);
  f.get("distance", w.distance);
  f.get("image", w.image);
  f.get("albedo", w.albedo);
  f.get("sad", w.sad);
  f.get("diffuse", w.diffuse);
  f.get("diffuse_target", w.diffuse_target);
  f.get("diffuse_margin", w.diffuse_margin);
  wrap_validation([&] { validate(w); return 0; });
  return w;
}

json to_json(const OptimizerConfig& c) {
  return {{"shape_iterations", c.shape_iterations},
          {"appearance_iterations", c.appearance_iterations},
          {"map_learning_rate", c.map_learning_rate},
          {"scalar_learning_rate", c.scalar_learning_rate},
          {"shape_learning_rate", c.shape_learning_rate},
          {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"epsilon", c.adam.epsilon}}},
          {"final_rate_fraction", c.final_rate_fraction},
          {"finite_difference_step", c.finite_difference_step},
          {"patience", c.patience},
          {"pitch_candidates", c.pitch_candidates},
          {"probe_iterations", c.probe_iterations},
          {"divergence_factor", c.divergence_factor},
          {"profile_rows", c.profile_rows},
          {"grid_columns", c.grid_columns},
          {"tex_rows", c.tex_rows},
          {"tex_cols", c.tex_cols},
          {"env_rows", c.env_rows},
          {"env_cols", c.env_cols},
          {"patches",
           {{"size", c.patches.size},
            {"count", c.patches.count},
            {"group_fraction", c.patches.group_fraction},
            {"min_validity", c.patches.min_validity}}},
          {"seed", c.seed},
          {"reference_batch_size", c.reference_batch_size},
          {"reference_training_iterations", c.reference_training_iterations}};
}

OptimizerConfig optimizer_config_from_json(const json& j, const OptimizerConfig& base) {
  const Fields f(j, "optimizer");
  f.only({"shape_iterations", "appearance_iterations", "map_learning_rate", "scalar_learning_rate",
          "shape_learning_rate", "adam", "final_rate_fraction", "finite_difference_step", "patience",
          "pitch_candidates", "probe_iterations", "divergence_factor", "profile_rows", "grid_columns", "tex_rows",
          "tex_cols", "env_rows", "env_cols", "patches", "seed", "reference_batch_size",
          "reference_training_iterations"});
  OptimizerConfig c = base;
  f.get("shape_iterations", c.shape_iterations);
  f.get("appearance_iterations", c.appearance_iterations);
  f.get("map_learning_rate", c.map_learning_rate);
  f.get("scalar_learning_rate", c.scalar_learning_rate);
  f.get("shape_learning_rate", c.shape_learning_rate);
  if (f.has("adam")) {
    const Fields a(f.raw("adam"), f.at("adam"));
    a.only({"beta1", "beta2", "epsilon"});
    a.get("beta1", c.adam.beta1);
    a.get("beta2", c.adam.beta2);
    a.get("epsilon", c.adam.epsilon);
  }
  f.get("final_rate_fraction", c.final_rate_fraction);
  f.get("finite_difference_step", c.finite_difference_step);
  f.get("patience", c.patience);
  f.get("pitch_candidates", c.pitch_candidates);
  f.get("probe_iterations", c.probe_iterations);
  f.get("divergence_factor", c.divergence_factor);
  f.get("profile_rows", c.profile_rows);
  f.get("grid_columns", c.grid_columns);
  f.get("tex_rows", c.tex_rows);
  f.get("tex_cols", c.tex_cols);
  f.get("env_rows", c.env_rows);
  f.get("env_cols", c.env_cols);
  if (f.has("patches")) {
    const Fields p(f.raw("patches"), f.at("patches"));
    p.only({"size", "count", "group_fraction", "min_validity"});
    p.get("size", c.patches.size);
    p.get("count", c.patches.count);
    p.get("group_fraction", c.patches.group_fraction);
    p.get("min_validity", c.patches.min_validity);
  }
  f.get("seed", c.seed);
  f.get("reference_batch_size", c.reference_batch_size);
  f.get("reference_training_iterations", c.reference_training_iterations);
  wrap_validation([&] { validate(c); return 0; });
  return c;
}

json to_json(const SynthConfig& c) {
  return {{"profile_rows", c.profile_rows},
          {"grid_columns", c.grid_columns},
          {"tex_rows", c.tex_rows},
          {"tex_cols", c.tex_cols},
          {"env_rows", c.env_rows},
          {"env_cols", c.env_cols},
          {"camera", {{"fov_deg", c.camera.fov_deg}, {"width", c.camera.width}, {"height", c.camera.height}}},
          {"diffuse_only", c.diffuse_only}};
}

SynthConfig synth_config_from_json(const json& j, const SynthConfig& base) {
  const Fields f(j, "config");
  f.only({"profile_rows", "grid_columns", "tex_rows", "tex_cols", "env_rows", "env_cols", "camera", "diffuse_only"});
  SynthConfig c = base;
  f.get("profile_rows", c.profile_rows);
  f.get("grid_columns", c.grid_columns);
  f.get("tex_rows", c.tex_rows);
  f.get("tex_cols", c.tex_cols);
  f.get("env_rows", c.env_rows);
  f.get("env_cols", c.env_cols);
  if (f.has("camera")) {
    const Fields cam(f.raw("camera"), f.at("camera"));
    cam.only({"fov_deg", "width", "height"});
    cam.get("fov_deg", c.camera.fov_deg);
    cam.get("width", c.camera.width);
    cam.get("height", c.camera.height);
  }
  f.get("diffuse_only", c.diffuse_only);
  auto positive = [&](int v, const char* key) {
    if (v < 1) Fields::fail(f.at(key), "must be positive");
  };
  positive(c.profile_rows < 2 ? 0 : c.profile_rows, "profile_rows");
  positive(c.grid_columns < 3 ? 0 : c.grid_columns, "grid_columns");
  positive(c.tex_rows, "tex_rows");
  positive(c.tex_cols, "tex_cols");
  positive(c.env_rows, "env_rows");
  positive(c.env_cols, "env_cols");
  if (c.camera.width < 1 || c.camera.height < 1 || !(c.camera.fov_deg > 0.0 && c.camera.fov_deg < 180.0))
    Fields::fail(f.at("camera"), "bad camera");
  return c;
}

json to_json(const RadiusProfile& p) { return {{"radii", p.radii}, {"height", p.height}}; }

RadiusProfile profile_from_json(const json& j) {
  const Fields f(j, "profile");
  f.only({"radii", "height"});
  RadiusProfile p;
  f.require("radii", p.radii);
  f.require("height", p.height);
  if (p.radii.size() < 2) Fields::fail(f.at("radii"), "need at least two radii");
  for (std::size_t i = 0; i < p.radii.size(); ++i)
    if (!(p.radii[i] > 0.0)) Fields::fail(f.at("radii") + "[" + std::to_string(i) + "]", "must be positive");
  if (!(p.height > 0.0)) Fields::fail(f.at("height"), "must be positive");
  return p;
}

json to_json(const CameraPose& p) { return {{"pitch", p.pitch}, {"roll", p.roll}, {"tx", p.tx}, {"ty", p.ty}}; }

CameraPose pose_from_json(const json& j) {
  const Fields f(j, "pose");
  f.only({"pitch", "roll", "tx", "ty"});
  CameraPose p;
  f.require("pitch", p.pitch);
  f.require("roll", p.roll);
  f.require("tx", p.tx);
  f.require("ty", p.ty);
  return p;
}

json to_json(const RunConfig& c) {
  return {{"version", kConfigFileVersion}, {"weights", to_json(c.weights)}, {"optimizer", to_json(c.optimizer)}};
}

RunConfig run_config_from_json(const json& j) {
  const Fields f(j, "");
  f.only({"version", "weights", "optimizer"});
  if (f.has("version")) check_version(f, kConfigFileVersion);
  RunConfig c;
  if (f.has("weights")) c.weights = loss_weights_from_json(f.raw("weights"));
  if (f.has("optimizer")) c.optimizer = optimizer_config_from_json(f.raw("optimizer"));
  return c;
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(config).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << h;
  return s.str();
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------- scenes

json scene_to_json(const Scene& scene, const SynthConfig& config) {
  json lobes = json::array();
  for (const auto& l : scene.lobes)
    lobes.push_back({{"axis", {l.axis.x(), l.axis.y(), l.axis.z()}},
                     {"bandwidth", l.bandwidth},
                     {"intensity", l.intensity}});
  return {{"version", kSceneFileVersion},
          {"generator_version", kGeneratorVersion},
          {"seed", scene.seed},
          {"config", to_json(config)},
          {"profile", to_json(scene.profile)},
          {"pose", to_json(scene.pose)},
          {"shininess", scene.material.shininess},
          {"specular_albedo", scene.material.specular_albedo},
          {"lobes", lobes},
          {"files", {{"albedo", SceneFiles::kAlbedoFull}, {"env", SceneFiles::kEnv}}}};
}

LoadedScene load_scene(const fs::path& scene_json) {
  const json j = read_json(scene_json);
  const Fields f(j, "");
  f.only({"version", "generator_version", "seed", "config", "profile", "pose", "shininess", "specular_albedo",
          "lobes", "files"});
  check_version(f, kSceneFileVersion);
  LoadedScene out;
  Scene& s = out.scene;
  f.require("seed", s.seed);
  out.config = synth_config_from_json(f.raw("config"));
  s.profile = profile_from_json(f.raw("profile"));
  s.pose = pose_from_json(f.raw("pose"));
  f.require("shininess", s.material.shininess);
  f.require("specular_albedo", s.material.specular_albedo);
  if (!(s.material.shininess >= kShininessMin && s.material.shininess <= kShininessMax))
    Fields::fail("shininess", "outside [1, 196]");
  if (!(s.material.specular_albedo >= 0.0 && s.material.specular_albedo <= kSpecularAlbedoMax))
    Fields::fail("specular_albedo", "outside [0, 2]");
  if (s.profile.rows() != out.config.profile_rows) Fields::fail("profile.radii", "length differs from config");
  if (f.has("lobes")) {
    const json& lobes = f.raw("lobes");
    if (!lobes.is_array()) Fields::fail("lobes", "expected array");
    for (std::size_t i = 0; i < lobes.size(); ++i) {
      const std::string where = "lobes[" + std::to_string(i) + "]";
      const Fields l(lobes[i], where);
      l.only({"axis", "bandwidth", "intensity"});
      SphericalGaussianLobe lobe;
      lobe.axis = vec3_from_json(l.raw("axis"), where + ".axis");
      l.require("bandwidth", lobe.bandwidth);
      l.require("intensity", lobe.intensity);
      s.lobes.push_back(lobe);
    }
  }
  const Fields files(f.raw("files"), "files");
  files.only({"albedo", "env"});
  std::string albedo_name, env_name;
  files.require("albedo", albedo_name);
  files.require("env", env_name);
  const fs::path dir = scene_json.parent_path();
  s.material.albedo = read_pfm_color(dir / albedo_name);
  s.env = read_pfm_scalar(dir / env_name);
  if (s.material.albedo.rows() != out.config.tex_rows || s.material.albedo.cols() != 3 * out.config.tex_cols)
    Fields::fail("files.albedo", "size differs from config");
  if (s.env.rows() != out.config.env_rows || s.env.cols() != out.config.env_cols)
    Fields::fail("files.env", "size differs from config");
  for (double v : s.env)
    if (!(v >= 0.0)) Fields::fail("files.env", "negative or non-finite intensity");
  return out;
}

void save_scene(const fs::path& dir, const GeneratedScene& g, const SynthConfig& config) {
  const GroundTruth& t = g.truth;
  write_png(dir / SceneFiles::kImage, t.image);
  write_png(dir / SceneFiles::kMask, t.silhouette);
  write_pfm(dir / SceneFiles::kAlbedo, t.albedo);
  write_pfm(dir / SceneFiles::kAlbedoFull, g.scene.material.albedo);
  write_pfm(dir / SceneFiles::kEnv, g.scene.env);
  write_pfm(dir / SceneFiles::kNormals, t.normals);
  write_pfm(dir / SceneFiles::kDiffuse, t.diffuse);
  write_pfm(dir / SceneFiles::kSpecular, t.specular);
  write_json(dir / SceneFiles::kScene, scene_to_json(g.scene, config));
}

}  // namespace lathe
