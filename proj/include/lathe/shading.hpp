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

// Normalised Phong shading under an equirectangular environment map.
//
// Every environment pixel i is a directional light of intensity E_i arriving
// from direction L_i. For a texel with unit normal N and unit view direction P
//
//   I_d = sum_i E_i max(L_i . N, 0)
//   I_s = (alpha + 1) / (2 pi) * sum_i E_i max(R_i . P, 0)^alpha,
//   R_i = 2 (L_i . N) N - L_i
//
// and the displayed texel is tau(A * I_d + rho * I_s) with tau(x) = x^(1/2.2).
// The sums carry no per-pixel solid-angle factor, so E_i is a light
// intensity. A radiance map converts to intensities with
// radiance_to_intensity(), which multiplies each pixel by its solid angle.
//
// Environment maps are indexed (row, col) with row i at polar angle
// theta = (i + 0.5) pi / rows measured from +Y, column j at azimuth
// phi = (j + 0.5) 2 pi / cols, and direction
// (sin theta sin phi, cos theta, sin theta cos phi). The middle columns
// (phi near pi) point towards the camera.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lathe/grid.hpp"

namespace lathe {

/// Single-channel light intensities, non-negative.
using EnvironmentMap = ScalarMap;

inline constexpr double kGamma = 2.2;

struct MaterialParams {
  ColorMap albedo;              ///< linear, in [0, 1]
  double shininess = 30.0;      ///< alpha in [1, 196]
  double specular_albedo = 0.5; ///< rho in [0, 2]
};

struct SphericalGaussianLobe {
  Vec3 axis = Vec3::UnitY();
  double bandwidth = 10.0;  ///< lambda
  double intensity = 0.1;   ///< F

  /// sqrt(lambda) * F * exp(-lambda (1 - dir . axis)).
  double eval(const Vec3& dir) const;
};

Vec3 light_direction(int row, int col, int rows, int cols);
Grid<Vec3> pixel_light_directions(int rows, int cols);
ScalarMap pixel_solid_angles(int rows, int cols);

/// 2 (l . n) n - l.
Vec3 reflect(const Vec3& light, const Vec3& normal);

/// Clamped Lambertian sum per texel. Normals must be unit within 1e-4.
ScalarMap diffuse_factor(const EnvironmentMap& env, const VectorMap& normals);
/// Normalised Phong specular sum per texel. Requires finite shininess >= 1.
ScalarMap specular_factor(const EnvironmentMap& env, const VectorMap& normals, const VectorMap& views,
                          double shininess);

/// x^(1/gamma); throws std::domain_error on negative input.
double tonemap(double x);
/// y^gamma; throws std::domain_error on negative input.
double inverse_tonemap(double y);

/// Per-texel, per-channel clamp(tau(A * I_d + rho * I_s), 0, 1).
ColorMap compose_texture(const ColorMap& albedo, const ScalarMap& diffuse, const ScalarMap& specular,
                         double specular_albedo);

/// Radiance of a sum of spherical Gaussian lobes sampled at pixel centres,
/// clipped to [0, 1].
EnvironmentMap sg_environment(std::span<const SphericalGaussianLobe> lobes, int rows, int cols);

/// Multiplies each pixel by its solid angle.
EnvironmentMap radiance_to_intensity(const EnvironmentMap& radiance);

/// Forward and adjoint shading for a fixed texel geometry.
///
/// Precomputes, per texel, the lights with a positive Lambertian term and the
/// lights with a positive reflection term (the latter sorted by decreasing
/// R . P, so that high exponents touch only a prefix). Repeated evaluation
/// with changing environment and shininess is then a sparse sum. evaluate()
/// caches the specular powers it computes for the next accumulate_gradient()
/// call, so an instance must not be shared between threads.
class ShadingOperator {
 public:
  ShadingOperator(const VectorMap& normals, const VectorMap& views, int env_rows, int env_cols);

  int texels() const { return static_cast<int>(diffuse_offsets_.size()) - 1; }
  int env_rows() const { return env_rows_; }
  int env_cols() const { return env_cols_; }
  int lights() const { return env_rows_ * env_cols_; }

  /// Row-major texel outputs.
  void evaluate(std::span<const double> env, double shininess, std::span<double> diffuse,
                std::span<double> specular);

  /// Adds d(loss)/d(env) and d(loss)/d(shininess) given d(loss)/d(I_d) and
  /// d(loss)/d(I_s), for the parameters of the last evaluate() call.
  void accumulate_gradient(std::span<const double> env, double shininess,
                           std::span<const double> grad_diffuse, std::span<const double> grad_specular,
                           std::span<double> grad_env, double& grad_shininess) const;

  /// sum_i max(L_i . N_j, 0) per texel.
  std::span<const double> diffuse_weight_sums() const { return diffuse_sums_; }

 private:
  struct Entry {
    std::uint32_t light;
    float value;  // Lambertian cosine, or log of the reflection cosine
  };

  int env_rows_;
  int env_cols_;
  std::vector<std::size_t> diffuse_offsets_;
  std::vector<Entry> diffuse_;
  std::vector<std::size_t> specular_offsets_;
  std::vector<Entry> specular_;
  std::vector<double> diffuse_sums_;
  // Per-texel prefix length and powers from the last evaluate().
  std::vector<std::size_t> active_;
  std::vector<double> powers_;
};

}  // namespace lathe
