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

// Per-image inverse rendering in two stages.
//
// Shape: radii, height and pose are fitted to the silhouette with Adam on
// logistic-reparameterised parameters, using central finite differences.
//
// Appearance: the image is unwrapped onto the frontal band and albedo,
// environment, shininess and specular albedo are fitted in texture space
// with analytic gradients. Every parameter is the image of an unbounded
// logit, so bounds hold exactly:
//   A = sigmoid(a), E = sigmoid(e), alpha = 1 + 195 sigmoid(s_a),
//   rho = 2 sigmoid(s_r).

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lathe/adam.hpp"
#include "lathe/geometry.hpp"
#include "lathe/losses.hpp"
#include "lathe/rng.hpp"
#include "lathe/sad.hpp"
#include "lathe/shading.hpp"

namespace lathe {

struct OptimizerConfig {
  int shape_iterations = 500;
  int appearance_iterations = 2000;
  double map_learning_rate = 0.05;     ///< albedo and environment
  double scalar_learning_rate = 0.01;  ///< shininess and specular albedo
  double shape_learning_rate = 0.05;   ///< every shape and pose logit
  AdamSettings adam;
  double final_rate_fraction = 0.05;     ///< rates decay geometrically to this fraction by the last step
  double finite_difference_step = 1e-3;  ///< in logit space
  int patience = 100;                    ///< shape steps without improvement before stopping
  std::vector<double> pitch_candidates{2.5, 10.0, 17.5};  ///< starting pitches tried by initialize_shape
  int probe_iterations = 40;                               ///< shape steps per candidate
  double divergence_factor = 10.0;       ///< appearance aborts above this multiple of the initial loss

  int profile_rows = 32;
  int grid_columns = 96;
  int tex_rows = 256;
  int tex_cols = 256;
  int env_rows = 16;
  int env_cols = 48;
  PatchConfig patches;
  std::uint64_t seed = 0;  ///< patch sampling

  // Network-training quantities kept for reference; unused by direct fitting.
  int reference_batch_size = 24;
  int reference_training_iterations = 40000;

  bool operator==(const OptimizerConfig&) const = default;
};

/// Throws std::invalid_argument on non-positive rates, iteration counts
/// below 1 or inconsistent sizes.
void validate(const OptimizerConfig& config);

// ---------------------------------------------------------------- bounds

struct ShapeBounds {
  static constexpr double kRadiusMin = 0.05, kRadiusMax = 0.9;
  static constexpr double kHeightMin = 0.5, kHeightMax = 0.95;
  static constexpr double kPitchMin = 0.0, kPitchMax = 20.0;
  static constexpr double kRollMin = -10.0, kRollMax = 10.0;
  static constexpr double kShiftMin = -0.2, kShiftMax = 0.2;
};

inline constexpr double kShininessMin = 1.0;
inline constexpr double kShininessMax = 196.0;
inline constexpr double kSpecularAlbedoMax = 2.0;

double sigmoid(double x);
/// Inverse of sigmoid; the argument is clamped into [1e-9, 1 - 1e-9].
double logit(double p);

/// Radii logits, then height, pitch, roll, tx, ty.
std::vector<double> shape_to_logits(const RadiusProfile& profile, const CameraPose& pose);
void shape_from_logits(std::span<const double> logits, RadiusProfile& profile, CameraPose& pose);

// ---------------------------------------------------------------- shape

enum class FitStatus { kCompleted, kEarlyStopped };

struct ShapeFit {
  RadiusProfile profile;
  CameraPose pose;
  double initial_loss = 0.0;
  double loss = 0.0;  ///< at the returned (best) iterate
  int iterations = 0;
  FitStatus status = FitStatus::kCompleted;
  std::vector<double> trace;  ///< loss before each step
};

/// Neutral start: constant radius 0.3, mid-range height and pose.
RadiusProfile neutral_profile(int rows);
CameraPose neutral_pose();

struct ShapeEstimate {
  RadiusProfile profile;
  CameraPose pose;
};

/// Starting shape read off a target silhouette: translation from the mask
/// centre, the given pitch, zero roll, height from the vertical extent, and
/// each radius from the mask half-width at the row's projected height.
/// Throws std::invalid_argument if the target has no pixel at or above 0.5.
ShapeEstimate estimate_shape(const ScalarMap& target, const Camera& camera, int rows, double pitch = 10.0);

/// Silhouette estimates at each candidate pitch, each refined for
/// probe_iterations steps; returns the refined start with the lowest loss.
ShapeEstimate initialize_shape(const ScalarMap& target, const Camera& camera, const OptimizerConfig& config,
                               const LossWeights& weights);

/// Fits shape and pose to a target silhouette (soft values in [0, 1]).
/// Throws std::invalid_argument if the target has no foreground.
ShapeFit fit_shape(const ScalarMap& target, const Camera& camera, const RadiusProfile& initial_profile,
                   const CameraPose& initial_pose, const OptimizerConfig& config, const LossWeights& weights);

// ---------------------------------------------------------------- appearance

/// Unwrapped observation and fixed geometry for the appearance stage.
struct AppearanceProblem {
  ColorMap target;  ///< tone-mapped texels
  Mask valid;
  VectorMap normals;  ///< camera space, unit
  VectorMap views;
  int env_rows = 16;
  int env_cols = 48;
};

/// Builds the problem from an image: unwraps the frontal band and keeps
/// texels that are visible and land inside the target silhouette.
AppearanceProblem make_appearance_problem(const ColorMap& image, const ScalarMap& silhouette,
                                          const RadiusProfile& profile, const CameraPose& pose,
                                          const Camera& camera, const OptimizerConfig& config);

/// Reparameterised appearance state (and gradients of the same shape).
struct AppearanceParams {
  ColorMap albedo;      ///< logits
  EnvironmentMap env;   ///< logits
  double shininess = 0.0;
  double specular = 0.0;

  ColorMap albedo_values() const;
  EnvironmentMap env_values() const;
  double shininess_value() const;
  double specular_albedo_value() const;
};

AppearanceParams make_params(const ColorMap& albedo, const EnvironmentMap& env, double shininess,
                             double specular_albedo);

/// Patch groups and kernel bandwidth, frozen for one step.
struct SadSelection {
  PatchGroups groups;
  double bandwidth = 1.0;
};

struct AppearanceEvaluation {
  LossTerms terms;
  double total = 0.0;  ///< without the silhouette term
  ScalarMap diffuse;   ///< I_d per texel (0 where invalid)
  ScalarMap specular;  ///< I_s per texel (0 where invalid)
  ColorMap rendered;   ///< tone-mapped reconstruction (0 where invalid)
};

/// The texture-space objective
///   lambda_im L_im + lambda_alb L_alb + lambda_SAD L_SAD + lambda_diff L_diff
/// over valid texels, with its exact gradient.
class AppearanceObjective {
 public:
  AppearanceObjective(AppearanceProblem problem, const LossWeights& weights, const PatchConfig& patches);

  const AppearanceProblem& problem() const { return problem_; }
  int valid_texels() const { return static_cast<int>(texels_.size()); }
  /// sum_i max(L_i . N, 0) per valid texel, in texel order.
  std::span<const double> diffuse_weight_sums() const { return op_.diffuse_weight_sums(); }

  /// Draws patch sites, groups them by the specular shading at `params`, and
  /// fixes the kernel bandwidth from the current albedo features.
  SadSelection select_patches(const AppearanceParams& params, Rng& rng);

  /// Objective value; fills `grad` (same shape as params) when non-null.
  /// Without a selection the SAD term is 0.
  double evaluate(const AppearanceParams& params, const SadSelection* selection, AppearanceParams* grad = nullptr,
                  AppearanceEvaluation* details = nullptr);

 private:
  AppearanceProblem problem_;
  LossWeights weights_;
  PatchConfig patches_;
  std::vector<std::size_t> texels_;  // valid texel indices
  std::vector<PatchSite> sites_;
  ShadingOperator op_;
};

struct TraceRow {
  int iteration = 0;
  LossTerms terms;
  double total = 0.0;
};

struct AppearanceFit {
  MaterialParams material;  ///< frontal albedo
  EnvironmentMap env;       ///< light intensities
  AppearanceProblem problem;
  double initial_loss = 0.0;
  double loss = 0.0;  ///< at the returned (best) iterate
  LossTerms terms;
  std::vector<TraceRow> trace;
};

/// Raised when an optimisation stage has to give up.
class OptimizerAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Initial state: E uniform at the level giving mean I_d = xi over valid
/// texels, A = inverse_tonemap(T) / max(I_d, 0.25), alpha = 30, rho = 0.5.
AppearanceParams initial_appearance(const AppearanceObjective& objective, const LossWeights& weights);

/// Runs Adam from `initial` (or initial_appearance() if absent). Throws
/// OptimizerAbort if the loss exceeds divergence_factor times its initial
/// value or becomes non-finite.
AppearanceFit fit_appearance(const AppearanceProblem& problem, const OptimizerConfig& config,
                             const LossWeights& weights, const std::optional<AppearanceParams>& initial = {});

// ---------------------------------------------------------------- pipeline

struct Decomposition {
  RadiusProfile profile;
  CameraPose pose;
  MaterialParams material;  ///< frontal albedo
  EnvironmentMap env;       ///< light intensities
};

struct DerenderResult {
  Decomposition decomposition;
  ShapeFit shape;
  AppearanceFit appearance;
  ColorMap reconstruction;
  double image_loss = 0.0;  ///< masked L1 in image space over S and the frontal coverage
};

/// initialize_shape, fit_shape, then appearance.
DerenderResult derender(const ColorMap& image, const ScalarMap& silhouette, const Camera& camera,
                        const OptimizerConfig& config, const LossWeights& weights);

/// Renders a decomposition, optionally under another environment or pose.
/// The frontal albedo is replicated three times around the circle.
ColorMap relight(const Decomposition& decomposition, const Camera& camera, int grid_columns,
                 const std::optional<EnvironmentMap>& env = {}, const std::optional<CameraPose>& pose = {});

}  // namespace lathe
