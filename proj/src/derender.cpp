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

#include "lathe/derender.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lathe/raster.hpp"
#include "lathe/synth.hpp"

namespace lathe {

namespace {

constexpr double kLogitClamp = 1e-9;
// Below this the tone-map slope is evaluated at the floor instead.
constexpr double kTonemapSlopeFloor = 1e-6;

double lerp_logit(double v, double lo, double hi) { return logit((v - lo) / (hi - lo)); }
double lerp_sigmoid(double x, double lo, double hi) { return lo + (hi - lo) * sigmoid(x); }

double tonemap_slope(double x) {
  return (1.0 / kGamma) * std::pow(std::max(x, kTonemapSlopeFloor), 1.0 / kGamma - 1.0);
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double decayed_rate(double rate, double final_fraction, int step, int steps) {
  return steps <= 1 ? rate : rate * std::pow(final_fraction, double(step) / double(steps - 1));
}

// Silhouette loss with cheap re-evaluation after moving one profile row.
//
// The rendered image is the pixelwise max over strips, so each strip keeps
// its own coverage layer. Moving row l only changes strips l-1 and l (and the
// cap when l = 0); the new value at a touched pixel is the max of the other
// layers and the re-splatted changed strips.
class SilhouetteObjective {
 public:
  SilhouetteObjective(const ScalarMap& target, const ScalarMap& dt, const Camera& camera, int columns,
                      const LossWeights& w)
      : target_(target), dt_(dt), camera_(camera), columns_(columns), w_(w),
        scratch_(camera.height, camera.width, 0.0), stamp_(camera.height, camera.width, 0) {}

  double full(const RadiusProfile& profile, const CameraPose& pose) const {
    return loss_silhouette(target_, rasterize_silhouette(revolve(profile, columns_), pose, camera_), dt_, w_).total;
  }

  // Makes (profile, pose) the base state for row perturbations.
  double set_base(const RadiusProfile& profile, const CameraPose& pose) {
    profile_ = profile;
    pose_ = pose;
    base_mesh_ = silhouette_mesh(revolve(profile, columns_), pose, camera_);
    if (!base_mesh_.any_in_front) throw std::invalid_argument("fit_shape: object is behind the camera");
    const std::size_t S = base_mesh_.strips.size();
    layers_.assign(S, ScalarMap(camera_.height, camera_.width, 0.0));
    image_ = ScalarMap(camera_.height, camera_.width, 0.0);
    for (std::size_t j = 0; j < S; ++j)
      for (const auto& t : base_mesh_.strips[j]) splat_soft_triangle(t, layers_[j]);
    for (std::size_t j = 0; j < S; ++j)
      for (std::size_t i = 0; i < image_.size(); ++i) image_[i] = std::max(image_[i], layers_[j][i]);
    base_loss_ = loss_silhouette(target_, image_, dt_, w_).total;
    return base_loss_;
  }

  // Loss with radius `row` replaced by `radius`, other parameters at the base.
  double with_radius(int row, double radius) {
    RadiusProfile p = profile_;
    p.radii[static_cast<std::size_t>(row)] = radius;
    const int L = static_cast<int>(p.radii.size());
    const SilhouetteMesh mesh = silhouette_mesh(revolve(p, columns_), pose_, camera_);
    std::vector<int> changed;
    if (row > 0) changed.push_back(row - 1);
    if (row < L - 1) changed.push_back(row);
    if (row == 0) changed.push_back(L - 1);

    ++epoch_;
    touched_.clear();
    auto touch = [&](const ScreenTriangle& t) {
      const PixelBounds b = soft_triangle_bounds(t, camera_.width, camera_.height);
      for (int r = b.r0; r <= b.r1; ++r)
        for (int c = b.c0; c <= b.c1; ++c)
          if (stamp_(r, c) != epoch_) {
            stamp_(r, c) = epoch_;
            touched_.push_back(static_cast<std::size_t>(r) * camera_.width + c);
          }
    };
    for (int j : changed) {
      for (const auto& t : base_mesh_.strips[static_cast<std::size_t>(j)]) touch(t);
      for (const auto& t : mesh.strips[static_cast<std::size_t>(j)]) {
        touch(t);
        splat_soft_triangle(t, scratch_);
      }
    }
    const double n = double(image_.size());
    double delta = 0.0;
    for (std::size_t i : touched_) {
      double v = scratch_[i];
      scratch_[i] = 0.0;
      for (std::size_t j = 0; j < layers_.size() && v < 1.0; ++j) {
        if (std::find(changed.begin(), changed.end(), int(j)) != changed.end()) continue;
        v = std::max(v, layers_[j][i]);
      }
      delta += pixel_loss(i, v) - pixel_loss(i, image_[i]);
    }
    return base_loss_ + delta / n;
  }

 private:
  double pixel_loss(std::size_t i, double v) const {
    const double d = target_[i] - v;
    return w_.silhouette * d * d + w_.distance * dt_[i] * v;
  }

  const ScalarMap& target_;
  const ScalarMap& dt_;
  Camera camera_;
  int columns_;
  LossWeights w_;
  RadiusProfile profile_;
  CameraPose pose_;
  SilhouetteMesh base_mesh_;
  std::vector<ScalarMap> layers_;
  ScalarMap image_;
  double base_loss_ = 0.0;
  ScalarMap scratch_;
  Grid<int> stamp_;
  int epoch_ = 0;
  std::vector<std::size_t> touched_;
};

}  // namespace

void validate(const OptimizerConfig& c) {
  if (c.shape_iterations < 1 || c.appearance_iterations < 1)
    throw std::invalid_argument("optimizer: iteration counts must be >= 1");
  if (!(c.map_learning_rate > 0.0) || !(c.scalar_learning_rate > 0.0) || !(c.shape_learning_rate > 0.0))
    throw std::invalid_argument("optimizer: learning rates must be positive");
  if (!(c.final_rate_fraction > 0.0) || c.final_rate_fraction > 1.0)
    throw std::invalid_argument("optimizer: final rate fraction must be in (0, 1]");
  if (!(c.finite_difference_step > 0.0)) throw std::invalid_argument("optimizer: finite difference step must be positive");
  if (c.pitch_candidates.empty() || c.probe_iterations < 1)
    throw std::invalid_argument("optimizer: need at least one pitch candidate and probe step");
  if (c.patience < 1) throw std::invalid_argument("optimizer: patience must be >= 1");
  if (!(c.divergence_factor > 1.0)) throw std::invalid_argument("optimizer: divergence factor must exceed 1");
  if (c.profile_rows < 2) throw std::invalid_argument("optimizer: need at least two profile rows");
  if (c.grid_columns < 3 || c.grid_columns % 3 != 0)
    throw std::invalid_argument("optimizer: grid columns must be a positive multiple of 3");
  if (c.tex_rows < 1 || c.tex_cols < 1 || c.env_rows < 1 || c.env_cols < 1)
    throw std::invalid_argument("optimizer: map sizes must be positive");
  if (c.patches.size < 4 || c.patches.size % 4 != 0 || c.patches.count < 1 || !(c.patches.group_fraction > 0.0) ||
      c.patches.group_fraction > 0.5 || c.patches.min_validity < 0.0 || c.patches.min_validity > 1.0)
    throw std::invalid_argument("optimizer: invalid patch configuration");
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) {
  p = std::clamp(p, kLogitClamp, 1.0 - kLogitClamp);
  return std::log(p / (1.0 - p));
}

std::vector<double> shape_to_logits(const RadiusProfile& profile, const CameraPose& pose) {
  using B = ShapeBounds;
  std::vector<double> x;
  for (double r : profile.radii) x.push_back(lerp_logit(r, B::kRadiusMin, B::kRadiusMax));
  x.push_back(lerp_logit(profile.height, B::kHeightMin, B::kHeightMax));
  x.push_back(lerp_logit(pose.pitch, B::kPitchMin, B::kPitchMax));
  x.push_back(lerp_logit(pose.roll, B::kRollMin, B::kRollMax));
  x.push_back(lerp_logit(pose.tx, B::kShiftMin, B::kShiftMax));
  x.push_back(lerp_logit(pose.ty, B::kShiftMin, B::kShiftMax));
  return x;
}

void shape_from_logits(std::span<const double> x, RadiusProfile& profile, CameraPose& pose) {
  using B = ShapeBounds;
  if (x.size() < 6) throw std::invalid_argument("shape_from_logits: too few parameters");
  const std::size_t L = x.size() - 5;
  profile.radii.resize(L);
  for (std::size_t l = 0; l < L; ++l) profile.radii[l] = lerp_sigmoid(x[l], B::kRadiusMin, B::kRadiusMax);
  profile.height = lerp_sigmoid(x[L], B::kHeightMin, B::kHeightMax);
  pose.pitch = lerp_sigmoid(x[L + 1], B::kPitchMin, B::kPitchMax);
  pose.roll = lerp_sigmoid(x[L + 2], B::kRollMin, B::kRollMax);
  pose.tx = lerp_sigmoid(x[L + 3], B::kShiftMin, B::kShiftMax);
  pose.ty = lerp_sigmoid(x[L + 4], B::kShiftMin, B::kShiftMax);
}

RadiusProfile neutral_profile(int rows) {
  return RadiusProfile{std::vector<double>(static_cast<std::size_t>(rows), 0.3),
                       0.5 * (ShapeBounds::kHeightMin + ShapeBounds::kHeightMax)};
}

CameraPose neutral_pose() { return CameraPose{10.0, 0.0, 0.0, 0.0}; }

// ---------------------------------------------------------------- shape

ShapeEstimate estimate_shape(const ScalarMap& target, const Camera& camera, int rows, double pitch_deg) {
  using B = ShapeBounds;
  if (rows < 2) throw std::invalid_argument("estimate_shape: need at least two rows");
  const int H = target.rows(), W = target.cols();
  // Per image row: leftmost and rightmost foreground pixel.
  std::vector<int> left(H, W), right(H, -1);
  int top = H, bottom = -1;
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c)
      if (target(r, c) >= 0.5) {
        left[r] = std::min(left[r], c);
        right[r] = std::max(right[r], c);
        top = std::min(top, r);
        bottom = std::max(bottom, r);
      }
  if (bottom < 0) throw std::invalid_argument("estimate_shape: empty silhouette");

  const double k = camera.distance() / camera.focal_px();  // object units per pixel
  ShapeEstimate est;
  est.pose = neutral_pose();
  est.pose.pitch = std::clamp(pitch_deg, B::kPitchMin, B::kPitchMax);

  const double cx = 0.5 * (*std::min_element(left.begin(), left.end()) + *std::max_element(right.begin(), right.end()) + 1);
  est.pose.tx = std::clamp((cx - 0.5 * W) * k, B::kShiftMin, B::kShiftMax);
  est.pose.ty = std::clamp((0.5 * H - 0.5 * (top + bottom + 1)) * k, B::kShiftMin, B::kShiftMax);

  auto half_width = [&](double row) {
    const int r = std::clamp(static_cast<int>(std::lround(row)), top, bottom);
    return right[r] < 0 ? 0.0 : 0.5 * (right[r] - left[r] + 1) * k;
  };
  const double pitch = est.pose.pitch * std::numbers::pi / 180.0;
  const double extent = (bottom - top + 1) * k;
  // The rims add r sin(pitch) above the top and below the base.
  auto widest = [&](int r0, int r1) {
    double w = 0.0;
    for (int r = r0; r <= r1; ++r) w = std::max(w, half_width(r));
    return w;
  };
  const int band = std::max(1, (bottom - top) / 10);
  const double rims = (widest(top, top + band) + widest(bottom - band, bottom)) * std::sin(pitch);
  const double height =
      std::clamp((extent - rims) / std::cos(pitch), B::kHeightMin, B::kHeightMax);
  est.profile.height = height;
  est.profile.radii.resize(static_cast<std::size_t>(rows));
  const double mid = 0.5 * (top + bottom);
  for (int l = 0; l < rows; ++l) {
    const double y = -0.5 * height + height * l / (rows - 1);
    const double row = mid - y * std::cos(pitch) / k;
    est.profile.radii[static_cast<std::size_t>(l)] = std::clamp(half_width(row), B::kRadiusMin, B::kRadiusMax);
  }
  return est;
}

ShapeFit fit_shape(const ScalarMap& target, const Camera& camera, const RadiusProfile& initial_profile,
                   const CameraPose& initial_pose, const OptimizerConfig& config, const LossWeights& weights) {
  validate(config);
  validate(weights);
  if (target.rows() != camera.height || target.cols() != camera.width)
    throw std::invalid_argument("fit_shape: silhouette size does not match camera");
  const DistanceField dt = distance_transform(silhouette_foreground(target));
  if (dt.empty_foreground) throw std::invalid_argument("fit_shape: empty silhouette");

  SilhouetteObjective objective(target, dt.distance, camera, config.grid_columns, weights);
  std::vector<double> x = shape_to_logits(initial_profile, initial_pose);
  const std::size_t L = initial_profile.radii.size();
  const std::size_t n = x.size();
  RadiusProfile profile;
  CameraPose pose;
  auto loss_at = [&](std::span<const double> v) {
    shape_from_logits(v, profile, pose);
    return objective.full(profile, pose);
  };
  auto radius_of = [](double v) { return ShapeBounds::kRadiusMin + (ShapeBounds::kRadiusMax - ShapeBounds::kRadiusMin) * sigmoid(v); };

  Adam opt(n, config.shape_learning_rate, config.adam);
  std::vector<double> grad(n), best = x;
  const double h = config.finite_difference_step;

  ShapeFit fit;
  double best_loss = std::numeric_limits<double>::infinity();
  int since_best = 0;
  const int T = config.shape_iterations;
  for (int it = 0; it < T; ++it) {
    shape_from_logits(x, profile, pose);
    const double f = objective.set_base(profile, pose);
    fit.trace.push_back(f);
    if (it == 0) fit.initial_loss = f;
    if (f < best_loss) {
      best_loss = f;
      best = x;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      fit.status = FitStatus::kEarlyStopped;
      break;
    }
    for (std::size_t i = 0; i < L; ++i) {
      const double up = objective.with_radius(int(i), radius_of(x[i] + h));
      const double down = objective.with_radius(int(i), radius_of(x[i] - h));
      grad[i] = (up - down) / (2.0 * h);
    }
    for (std::size_t i = L; i < n; ++i) {
      const double keep = x[i];
      x[i] = keep + h;
      const double up = loss_at(x);
      x[i] = keep - h;
      const double down = loss_at(x);
      x[i] = keep;
      grad[i] = (up - down) / (2.0 * h);
    }
    opt.set_learning_rate(decayed_rate(config.shape_learning_rate, config.final_rate_fraction, it, T));
    opt.step(x, grad);
    fit.iterations = it + 1;
  }
  if (fit.status == FitStatus::kCompleted) {
    const double f = loss_at(x);
    fit.trace.push_back(f);
    if (f < best_loss) {
      best_loss = f;
      best = x;
    }
  }
  shape_from_logits(best, fit.profile, fit.pose);
  fit.loss = best_loss;
  return fit;
}

ShapeEstimate initialize_shape(const ScalarMap& target, const Camera& camera, const OptimizerConfig& config,
                               const LossWeights& weights) {
  OptimizerConfig probe = config;
  probe.shape_iterations = config.probe_iterations;
  ShapeEstimate best;
  double best_loss = std::numeric_limits<double>::infinity();
  for (double pitch : config.pitch_candidates) {
    const ShapeEstimate e = estimate_shape(target, camera, config.profile_rows, pitch);
    const ShapeFit f = fit_shape(target, camera, e.profile, e.pose, probe, weights);
    if (f.loss < best_loss) {
      best_loss = f.loss;
      best = {f.profile, f.pose};
    }
  }
  return best;
}

// ---------------------------------------------------------------- appearance

AppearanceProblem make_appearance_problem(const ColorMap& image, const ScalarMap& silhouette,
                                          const RadiusProfile& profile, const CameraPose& pose,
                                          const Camera& camera, const OptimizerConfig& config) {
  if (!image.same_shape(silhouette) || image.rows() != camera.height || image.cols() != camera.width)
    throw std::invalid_argument("make_appearance_problem: image, silhouette and camera sizes differ");
  const VertexGrid grid = revolve(profile, config.grid_columns);
  const Band band = frontal_band(grid, pose, camera);
  UnwrappedTexture u = unwrap(grid, band, pose, camera, image, config.tex_rows, config.tex_cols);
  const TexelGeometry geo = texel_geometry(grid, band, pose, camera, config.tex_rows, config.tex_cols);

  AppearanceProblem p;
  p.env_rows = config.env_rows;
  p.env_cols = config.env_cols;
  p.normals = geo.normal;
  p.views = geo.view;
  p.valid = u.valid;
  for (std::size_t i = 0; i < p.valid.size(); ++i) {
    if (!p.valid[i]) continue;
    const Vec3 q = camera.project(geo.position[i]);
    const int r = std::clamp(static_cast<int>(q.y()), 0, camera.height - 1);
    const int c = std::clamp(static_cast<int>(q.x()), 0, camera.width - 1);
    if (silhouette(r, c) < 0.5) {
      p.valid[i] = 0;
      u.values[i] = Color::Zero();
    }
  }
  p.target = std::move(u.values);
  return p;
}

ColorMap AppearanceParams::albedo_values() const {
  ColorMap out(albedo.rows(), albedo.cols());
  for (std::size_t i = 0; i < albedo.size(); ++i)
    for (int c = 0; c < 3; ++c) out[i][c] = sigmoid(albedo[i][c]);
  return out;
}

EnvironmentMap AppearanceParams::env_values() const {
  EnvironmentMap out(env.rows(), env.cols());
  for (std::size_t i = 0; i < env.size(); ++i) out[i] = sigmoid(env[i]);
  return out;
}

double AppearanceParams::shininess_value() const { return lerp_sigmoid(shininess, kShininessMin, kShininessMax); }
double AppearanceParams::specular_albedo_value() const { return kSpecularAlbedoMax * sigmoid(specular); }

AppearanceParams make_params(const ColorMap& albedo, const EnvironmentMap& env, double shininess,
                             double specular_albedo) {
  AppearanceParams p;
  p.albedo = ColorMap(albedo.rows(), albedo.cols());
  for (std::size_t i = 0; i < albedo.size(); ++i)
    for (int c = 0; c < 3; ++c) p.albedo[i][c] = logit(albedo[i][c]);
  p.env = EnvironmentMap(env.rows(), env.cols());
  for (std::size_t i = 0; i < env.size(); ++i) p.env[i] = logit(env[i]);
  p.shininess = lerp_logit(shininess, kShininessMin, kShininessMax);
  p.specular = logit(specular_albedo / kSpecularAlbedoMax);
  return p;
}

namespace {

std::vector<std::size_t> valid_indices(const Mask& valid) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < valid.size(); ++i)
    if (valid[i]) idx.push_back(i);
  return idx;
}

ShadingOperator make_operator(const AppearanceProblem& p, const std::vector<std::size_t>& texels) {
  if (!p.target.same_shape(p.valid) || !p.target.same_shape(p.normals) || !p.target.same_shape(p.views))
    throw std::invalid_argument("AppearanceObjective: problem maps differ in shape");
  VectorMap n(1, static_cast<int>(texels.size())), v(1, static_cast<int>(texels.size()));
  for (std::size_t k = 0; k < texels.size(); ++k) {
    n[k] = p.normals[texels[k]];
    v[k] = p.views[texels[k]];
  }
  return ShadingOperator(n, v, p.env_rows, p.env_cols);
}

ColorMap tonemapped_albedo(const AppearanceParams& params) {
  ColorMap out(params.albedo.rows(), params.albedo.cols());
  for (std::size_t i = 0; i < out.size(); ++i)
    for (int c = 0; c < 3; ++c) out[i][c] = tonemap(sigmoid(params.albedo[i][c]));
  return out;
}

std::vector<PatchFeature> features_of(const ColorMap& map, const std::vector<PatchSite>& sites, int size) {
  std::vector<PatchFeature> f;
  f.reserve(sites.size());
  for (const auto& s : sites) f.push_back(patch_features(map, s, size));
  return f;
}

}  // namespace

AppearanceObjective::AppearanceObjective(AppearanceProblem problem, const LossWeights& weights,
                                         const PatchConfig& patches)
    : problem_(std::move(problem)),
      weights_(weights),
      patches_(patches),
      texels_(valid_indices(problem_.valid)),
      sites_(valid_patch_sites(problem_.valid, patches)),
      op_(make_operator(problem_, texels_)) {
  validate(weights_);
}

SadSelection AppearanceObjective::select_patches(const AppearanceParams& params, Rng& rng) {
  const std::size_t N = texels_.size();
  const EnvironmentMap E = params.env_values();
  std::vector<double> Id(N), Is(N);
  op_.evaluate(E.span(), params.shininess_value(), Id, Is);
  ScalarMap specular(problem_.target.rows(), problem_.target.cols(), 0.0);
  for (std::size_t k = 0; k < N; ++k) specular[texels_[k]] = Is[k];

  SadSelection sel;
  const std::vector<PatchSite> drawn = sample_patch_sites(sites_, patches_.count, rng);
  sel.groups = sad_group_patches(specular, problem_.valid, drawn, patches_);
  if (!sel.groups.skipped) {
    const ColorMap tA = tonemapped_albedo(params);
    sel.bandwidth = median_bandwidth(features_of(tA, sel.groups.nonspecular, patches_.size),
                                     features_of(tA, sel.groups.specular, patches_.size));
  }
  return sel;
}

double AppearanceObjective::evaluate(const AppearanceParams& params, const SadSelection* selection,
                                     AppearanceParams* grad, AppearanceEvaluation* details) {
  const AppearanceProblem& P = problem_;
  if (!params.albedo.same_shape(P.target) || params.env.rows() != P.env_rows || params.env.cols() != P.env_cols)
    throw std::invalid_argument("AppearanceObjective: parameter shapes do not match the problem");
  const std::size_t N = texels_.size();
  const LossWeights& w = weights_;

  const EnvironmentMap E = params.env_values();
  const double alpha = params.shininess_value();
  const double rho = params.specular_albedo_value();
  std::vector<double> Id(N), Is(N);
  op_.evaluate(E.span(), alpha, Id, Is);

  std::vector<Color> A(N);
  Color mean_A = Color::Zero();
  double mean_Id = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    const Color& a = params.albedo[texels_[k]];
    A[k] = Color(sigmoid(a[0]), sigmoid(a[1]), sigmoid(a[2]));
    mean_A += A[k];
    mean_Id += Id[k];
  }
  if (N > 0) {
    mean_A /= double(N);
    mean_Id /= double(N);
  }

  LossTerms terms;
  // d(total)/d(A), d/d(I_d), d/d(I_s), d/d(rho), d/d(mean A)
  std::vector<Color> gA(N, Color::Zero());
  std::vector<double> gId(N, 0.0), gIs(N, 0.0);
  double g_rho = 0.0;
  Color g_meanA = Color::Zero();
  const double inv = N > 0 ? 1.0 / (3.0 * double(N)) : 0.0;

  if (details) {
    details->diffuse = ScalarMap(P.target.rows(), P.target.cols(), 0.0);
    details->specular = ScalarMap(P.target.rows(), P.target.cols(), 0.0);
    details->rendered = ColorMap(P.target.rows(), P.target.cols(), Color::Zero());
  }

  for (std::size_t k = 0; k < N; ++k) {
    const Color& T = P.target[texels_[k]];
    for (int c = 0; c < 3; ++c) {
      // Reconstruction with the per-texel albedo.
      const double x = A[k][c] * Id[k] + rho * Is[k];
      const double y = tonemap(std::max(x, 0.0));
      const double That = std::min(y, 1.0);
      terms.image += std::abs(That - T[c]) * inv;
      if (details) details->rendered[texels_[k]][c] = That;
      if (grad && y < 1.0) {
        const double gx = w.image * sign(That - T[c]) * inv * tonemap_slope(x);
        gA[k][c] += gx * Id[k];
        gId[k] += gx * A[k][c];
        gIs[k] += gx * rho;
        g_rho += gx * Is[k];
      }
      // Reconstruction with the single mean colour.
      const double xm = mean_A[c] * Id[k] + rho * Is[k];
      const double ym = tonemap(std::max(xm, 0.0));
      const double Tm = std::min(ym, 1.0);
      terms.albedo += std::abs(Tm - T[c]) * inv;
      if (grad && ym < 1.0) {
        const double gx = w.albedo * sign(Tm - T[c]) * inv * tonemap_slope(xm);
        g_meanA[c] += gx * Id[k];
        gId[k] += gx * mean_A[c];
        gIs[k] += gx * rho;
        g_rho += gx * Is[k];
      }
    }
  }
  if (grad && N > 0)
    for (std::size_t k = 0; k < N; ++k) gA[k] += g_meanA / double(N);

  // Diffuse brightness prior.
  if (N > 0) {
    terms.diffuse = loss_diffuse_reg(mean_Id, w);
    const double u = std::abs(mean_Id - w.diffuse_target) - w.diffuse_margin;
    if (grad && u > 0.0) {
      const double g = w.diffuse * 2.0 * u * sign(mean_Id - w.diffuse_target) / double(N);
      for (double& v : gId) v += g;
    }
  }

  // Specularity-grouped patch discrepancy on the tone-mapped albedo.
  ColorMap g_tA;
  if (selection && !selection->groups.skipped) {
    const ColorMap tA = tonemapped_albedo(params);
    const auto fx = features_of(tA, selection->groups.nonspecular, patches_.size);
    const auto fy = features_of(tA, selection->groups.specular, patches_.size);
    std::vector<PatchFeature> gx, gy;
    terms.sad = loss_sad_surrogate(fx, fy, selection->bandwidth, grad ? &gx : nullptr, grad ? &gy : nullptr).value;
    if (grad && w.sad > 0.0) {
      g_tA = ColorMap(tA.rows(), tA.cols(), Color::Zero());
      for (std::size_t i = 0; i < fx.size(); ++i)
        patch_features_backward(tA, selection->groups.nonspecular[i], patches_.size, w.sad * gx[i], g_tA);
      for (std::size_t i = 0; i < fy.size(); ++i)
        patch_features_backward(tA, selection->groups.specular[i], patches_.size, w.sad * gy[i], g_tA);
    }
  }

  const double total = w.image * terms.image + w.albedo * terms.albedo + w.sad * terms.sad + w.diffuse * terms.diffuse;
  for (const double v : {terms.image, terms.albedo, terms.sad, terms.diffuse})
    if (!std::isfinite(v)) loss_total(terms, w);  // throws, naming the term

  if (details) {
    details->terms = terms;
    details->total = total;
    for (std::size_t k = 0; k < N; ++k) {
      details->diffuse[texels_[k]] = Id[k];
      details->specular[texels_[k]] = Is[k];
    }
  }

  if (grad) {
    grad->albedo = ColorMap(P.target.rows(), P.target.cols(), Color::Zero());
    grad->env = EnvironmentMap(P.env_rows, P.env_cols, 0.0);
    for (std::size_t k = 0; k < N; ++k) {
      const std::size_t t = texels_[k];
      for (int c = 0; c < 3; ++c) grad->albedo[t][c] = gA[k][c] * A[k][c] * (1.0 - A[k][c]);
    }
    if (!g_tA.empty()) {
      for (std::size_t t = 0; t < g_tA.size(); ++t) {
        for (int c = 0; c < 3; ++c) {
          if (g_tA[t][c] == 0.0) continue;
          const double a = sigmoid(params.albedo[t][c]);
          grad->albedo[t][c] += g_tA[t][c] * tonemap_slope(a) * a * (1.0 - a);
        }
      }
    }
    double g_alpha = 0.0;
    op_.accumulate_gradient(E.span(), alpha, gId, gIs, grad->env.span(), g_alpha);
    for (std::size_t i = 0; i < E.size(); ++i) grad->env[i] *= E[i] * (1.0 - E[i]);
    const double s_a = sigmoid(params.shininess);
    grad->shininess = g_alpha * (kShininessMax - kShininessMin) * s_a * (1.0 - s_a);
    const double s_r = sigmoid(params.specular);
    grad->specular = g_rho * kSpecularAlbedoMax * s_r * (1.0 - s_r);
  }
  return total;
}

AppearanceParams initial_appearance(const AppearanceObjective& objective, const LossWeights& weights) {
  const AppearanceProblem& P = objective.problem();
  const auto sums = objective.diffuse_weight_sums();
  double mean_sum = 0.0;
  for (double s : sums) mean_sum += s;
  if (!sums.empty()) mean_sum /= double(sums.size());
  const double e0 = mean_sum > 0.0 ? std::clamp(weights.diffuse_target / mean_sum, 1e-3, 1.0 - 1e-3) : 0.3;

  ColorMap A(P.target.rows(), P.target.cols(), Color::Zero());
  Color mean = Color::Zero();
  std::size_t k = 0, n = 0;
  for (std::size_t i = 0; i < A.size(); ++i) {
    if (!P.valid[i]) continue;
    const double Id = std::max(e0 * sums[k++], 0.25);
    for (int c = 0; c < 3; ++c) A[i][c] = std::clamp(inverse_tonemap(P.target[i][c]) / Id, 0.01, 0.99);
    mean += A[i];
    ++n;
  }
  // Unobserved texels start at the mean observed colour.
  if (n > 0) mean /= double(n);
  else mean = Color::Constant(0.5);
  for (std::size_t i = 0; i < A.size(); ++i)
    if (!P.valid[i]) A[i] = mean;
  return make_params(A, EnvironmentMap(P.env_rows, P.env_cols, e0), 30.0, 0.5);
}

AppearanceFit fit_appearance(const AppearanceProblem& problem, const OptimizerConfig& config,
                             const LossWeights& weights, const std::optional<AppearanceParams>& initial) {
  validate(config);
  AppearanceObjective objective(problem, weights, config.patches);
  AppearanceParams p = initial ? *initial : initial_appearance(objective, weights);
  AppearanceParams best = p, grad;
  Rng rng(config.seed);

  Adam albedo_opt(3 * p.albedo.size(), config.map_learning_rate, config.adam);
  Adam env_opt(p.env.size(), config.map_learning_rate, config.adam);
  Adam scalar_opt(2, config.scalar_learning_rate, config.adam);

  AppearanceFit fit;
  double best_loss = std::numeric_limits<double>::infinity();
  AppearanceEvaluation details;
  for (int it = 0; it < config.appearance_iterations; ++it) {
    const SadSelection sel = objective.select_patches(p, rng);
    double f;
    try {
      f = objective.evaluate(p, &sel, &grad, &details);
    } catch (const NonFiniteLoss& e) {
      throw OptimizerAbort(std::string("appearance fit: ") + e.what() + " at iteration " + std::to_string(it));
    }
    fit.trace.push_back({it, details.terms, f});
    if (it == 0) fit.initial_loss = f;
    if (f > config.divergence_factor * fit.initial_loss && fit.initial_loss > 0.0)
      throw OptimizerAbort("appearance fit diverged at iteration " + std::to_string(it) + ": loss " +
                           std::to_string(f) + " vs initial " + std::to_string(fit.initial_loss));
    if (f < best_loss) {
      best_loss = f;
      best = p;
      fit.terms = details.terms;
    }
    const int T = config.appearance_iterations;
    for (Adam* opt : {&albedo_opt, &env_opt})
      opt->set_learning_rate(decayed_rate(config.map_learning_rate, config.final_rate_fraction, it, T));
    scalar_opt.set_learning_rate(decayed_rate(config.scalar_learning_rate, config.final_rate_fraction, it, T));
    albedo_opt.step(std::span(p.albedo.data().data()->data(), 3 * p.albedo.size()),
                    std::span<const double>(grad.albedo.data().data()->data(), 3 * grad.albedo.size()));
    env_opt.step(p.env.span(), grad.env.span());
    double scalars[2] = {p.shininess, p.specular};
    const double gscalars[2] = {grad.shininess, grad.specular};
    scalar_opt.step(scalars, gscalars);
    p.shininess = scalars[0];
    p.specular = scalars[1];
  }
  fit.loss = best_loss;
  fit.material.albedo = best.albedo_values();
  fit.material.shininess = best.shininess_value();
  fit.material.specular_albedo = best.specular_albedo_value();
  fit.env = best.env_values();
  fit.problem = objective.problem();
  return fit;
}

// ---------------------------------------------------------------- pipeline

ColorMap relight(const Decomposition& d, const Camera& camera, int grid_columns, const std::optional<EnvironmentMap>& env,
                 const std::optional<CameraPose>& pose) {
  Scene scene;
  scene.profile = d.profile;
  scene.pose = pose ? *pose : d.pose;
  scene.material = d.material;
  scene.material.albedo = tile_columns(d.material.albedo, 3);
  scene.env = env ? *env : d.env;
  SynthConfig cfg;
  cfg.profile_rows = d.profile.rows();
  cfg.grid_columns = grid_columns;
  cfg.tex_rows = d.material.albedo.rows();
  cfg.tex_cols = d.material.albedo.cols();
  cfg.env_rows = scene.env.rows();
  cfg.env_cols = scene.env.cols();
  cfg.camera = camera;
  return render_scene(scene, cfg).image;
}

DerenderResult derender(const ColorMap& image, const ScalarMap& silhouette, const Camera& camera,
                        const OptimizerConfig& config, const LossWeights& weights) {
  validate(config);
  DerenderResult out;
  const ShapeEstimate start = initialize_shape(silhouette, camera, config, weights);
  out.shape = fit_shape(silhouette, camera, start.profile, start.pose, config, weights);
  const AppearanceProblem problem =
      make_appearance_problem(image, silhouette, out.shape.profile, out.shape.pose, camera, config);
  out.appearance = fit_appearance(problem, config, weights);

  Decomposition& d = out.decomposition;
  d.profile = out.shape.profile;
  d.pose = out.shape.pose;
  d.material = out.appearance.material;
  d.env = out.appearance.env;
  out.reconstruction = relight(d, camera, config.grid_columns);

  const VertexGrid grid = revolve(d.profile, config.grid_columns);
  const Band band = frontal_band(grid, d.pose, camera);
  const Mask frontal = rasterize_texture(grid, band, d.pose, camera, ColorMap(1, 1, Color::Ones())).coverage;
  Mask both(silhouette.rows(), silhouette.cols(), 0);
  for (std::size_t i = 0; i < both.size(); ++i) both[i] = (silhouette[i] >= 0.5 && frontal[i]) ? 1 : 0;
  out.image_loss = loss_image(image, out.reconstruction, both).value;
  return out;
}

}  // namespace lathe
