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

// Synthetic vase scenes.
//
// A scene is a pure function of its seed. Random draws are consumed in this
// order: curve (t, a1, p1, q1, a2, p2, q2), height, pose (pitch, roll, tx,
// ty), shininess, specular albedo, albedo map, then three lighting lobes
// (axis elevation, axis azimuth, bandwidth, intensity each).
//
// The albedo map covers the whole circle (tex_rows x 3 tex_cols) with the
// frontal band in its middle third, and is periodic in columns.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lathe/geometry.hpp"
#include "lathe/grid.hpp"
#include "lathe/raster.hpp"
#include "lathe/rng.hpp"
#include "lathe/shading.hpp"

namespace lathe {

inline constexpr int kGeneratorVersion = 1;

struct SynthConfig {
  int profile_rows = 32;   ///< L
  int grid_columns = 96;   ///< K
  int tex_rows = 256;      ///< H_T
  int tex_cols = 256;      ///< W_T of the frontal band
  int env_rows = 16;
  int env_cols = 48;
  Camera camera;
  bool diffuse_only = false;  ///< force rho = 0

  bool operator==(const SynthConfig&) const = default;
};

/// Parameters of the two-sine generatrix.
struct SorCurveParams {
  double t = 0.2;
  double a1 = 0.0, p1 = 0.0, q1 = 0.0;
  double a2 = 0.0, p2 = 0.0, q2 = 0.0;
};

/// r_i = t + a1 (1 + sin((L - i)/L p1 + i/L q1)) + a2 (1 + sin(p2 + i/L q2)),
/// unclipped.
std::vector<double> sor_curve(const SorCurveParams& params, int L);

/// Draws curve parameters and a height in (0.5, 0.95); radii are clipped to
/// [0.05, 0.9].
RadiusProfile sample_sor_curve(Rng& rng, int L);

/// pitch in (0, 20) degrees, roll in (-10, 10) degrees, translation in
/// (-0.1, 0.1) per axis.
CameraPose sample_pose(Rng& rng);

enum class AlbedoStyle { kBands, kStripes, kNoise, kTwoTone };

/// Colour augmentation: hue rotation about the grey axis (radians), then
/// (x - 0.5) * contrast + 0.5 + brightness, clamped to [0.05, 0.95].
struct ColorJitter {
  double hue = 0.0;
  double brightness = 0.0;
  double contrast = 1.0;
};

/// Equal-height horizontal bands, one per palette colour, top to bottom.
ColorMap band_albedo(int rows, int cols, std::span<const Color> palette);
/// `stripes` vertical stripes alternating between a and b.
ColorMap stripe_albedo(int rows, int cols, int stripes, const Color& a, const Color& b);
/// a above row split * rows, b below.
ColorMap two_tone_albedo(int rows, int cols, double split, const Color& a, const Color& b);
/// Smooth value noise blending a and b, `cells` lattice cells across the
/// columns (periodic) and cells / 3 (at least 2) down the rows.
ColorMap noise_albedo(Rng& rng, int rows, int cols, int cells, const Color& a, const Color& b);
ColorMap apply_jitter(const ColorMap& albedo, const ColorJitter& jitter);

/// Picks a style, palette and jitter; values in [0.05, 0.95].
ColorMap procedural_albedo(Rng& rng, int rows, int cols);

/// Shininess in (1, 196), specular albedo in (0.1, 1), procedural albedo.
MaterialParams sample_material(Rng& rng, int rows, int cols);

/// Three lobes with axes in the upper-front quarter (y >= 0, z <= 0),
/// bandwidth in (10, 30), intensity in (0.1, 0.3).
std::vector<SphericalGaussianLobe> sample_sg_lobes(Rng& rng, int count = 3);

/// Radiance of three sampled lobes.
EnvironmentMap sample_sg_lighting(Rng& rng, int rows, int cols);

struct Scene {
  std::uint64_t seed = 0;
  RadiusProfile profile;
  CameraPose pose;
  MaterialParams material;  ///< albedo over the whole circle
  EnvironmentMap env;       ///< light intensities used for shading
  std::vector<SphericalGaussianLobe> lobes;
};

/// Everything the forward model produces for a scene. Texel maps cover the
/// whole circle; the frontal band is columns [tex_cols, 2 tex_cols).
struct SceneRender {
  ColorMap image;
  Mask coverage;
  SilhouetteImage silhouette;
  Band frontal;
  ColorMap albedo;    ///< effective albedo (inner wall dimmed)
  ScalarMap diffuse;  ///< I_d
  ScalarMap specular; ///< I_s
  VectorMap normals;  ///< outward, camera space
  VectorMap views;
  ColorMap texture;   ///< tone-mapped composite
};

/// Albedo multiplier for texels seen from behind (the inside of the vessel).
inline constexpr double kInnerWallDimming = 0.5;

/// Forward model: shades the whole circle in texture space (texels facing
/// away use the flipped normal and dimmed albedo) and rasterises it.
SceneRender render_scene(const Scene& scene, const SynthConfig& config);

/// Frontal ground truth of a scene.
struct GroundTruth {
  ColorMap image;
  SilhouetteImage silhouette;
  ColorMap albedo;
  ScalarMap diffuse;
  ScalarMap specular;
  VectorMap normals;
  EnvironmentMap env_radiance;
};

GroundTruth ground_truth(const Scene& scene, const SceneRender& render, const SynthConfig& config);

Scene sample_scene(std::uint64_t seed, const SynthConfig& config);

struct GeneratedScene {
  Scene scene;
  GroundTruth truth;
};

GeneratedScene generate_scene(std::uint64_t seed, const SynthConfig& config);

}  // namespace lathe
