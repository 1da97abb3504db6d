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

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lathe/derender.hpp"
#include "lathe/metrics.hpp"
#include "lathe/raster.hpp"
#include "lathe/synth.hpp"

using namespace lathe;

namespace {

Vec3 random_unit(Rng& rng) {
  while (true) {
    Vec3 v(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double n = v.norm();
    if (n > 0.1 && n < 1.0) return v / n;
  }
}

// Small texture-space problem with front-facing normals.
AppearanceProblem random_problem(Rng& rng, int rows, int cols, int env_rows, int env_cols, double invalid = 0.05) {
  AppearanceProblem p;
  p.env_rows = env_rows;
  p.env_cols = env_cols;
  p.target = ColorMap(rows, cols);
  p.valid = Mask(rows, cols, 1);
  p.normals = VectorMap(rows, cols);
  p.views = VectorMap(rows, cols);
  for (std::size_t i = 0; i < p.target.size(); ++i) {
    Vec3 n = random_unit(rng);
    if (n.z() > 0) n.z() = -n.z();
    p.normals[i] = n;
    p.views[i] = (Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), -1.0)).normalized();
    p.target[i] = Color(rng.uniform(0.05, 0.9), rng.uniform(0.05, 0.9), rng.uniform(0.05, 0.9));
    if (rng.uniform() < invalid) {
      p.valid[i] = 0;
      p.target[i] = Color::Zero();
    }
  }
  return p;
}

AppearanceParams random_params(Rng& rng, const AppearanceProblem& p) {
  AppearanceParams a;
  a.albedo = ColorMap(p.target.rows(), p.target.cols());
  for (Color& c : a.albedo) c = Color(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
  a.env = EnvironmentMap(p.env_rows, p.env_cols);
  for (double& v : a.env) v = rng.uniform(-4, -1);
  a.shininess = rng.uniform(-2, 2);
  a.specular = rng.uniform(-2, 1);
  return a;
}

// Every parameter of `a` as one flat list of pointers.
std::vector<double*> coordinates(AppearanceParams& a) {
  std::vector<double*> out;
  for (Color& c : a.albedo)
    for (int k = 0; k < 3; ++k) out.push_back(&c[k]);
  for (double& v : a.env) out.push_back(&v);
  out.push_back(&a.shininess);
  out.push_back(&a.specular);
  return out;
}

SynthConfig small_synth(int px = 96) {
  SynthConfig c;
  c.camera.width = c.camera.height = px;
  c.tex_rows = c.tex_cols = 32;
  return c;
}

}  // namespace

TEST(Reparameterisation, ShapeLogitsRoundTrip) {
  Rng rng(1);
  RadiusProfile p;
  for (int i = 0; i < 8; ++i) p.radii.push_back(rng.uniform(0.1, 0.8));
  p.height = 0.7;
  const CameraPose pose{12.0, -3.0, 0.05, -0.1};
  RadiusProfile q;
  CameraPose r;
  shape_from_logits(shape_to_logits(p, pose), q, r);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(q.radii[i], p.radii[i], 1e-12);
  EXPECT_NEAR(q.height, 0.7, 1e-12);
  EXPECT_NEAR(r.pitch, 12.0, 1e-10);
  EXPECT_NEAR(r.roll, -3.0, 1e-10);
  EXPECT_NEAR(r.tx, 0.05, 1e-12);
  EXPECT_NEAR(r.ty, -0.1, 1e-12);
}

TEST(Reparameterisation, ExtremeLogitsStayInBounds) {
  for (double x : {-60.0, 60.0}) {
    std::vector<double> v(37, x);
    RadiusProfile p;
    CameraPose pose;
    shape_from_logits(v, p, pose);
    for (double r : p.radii) {
      EXPECT_GE(r, ShapeBounds::kRadiusMin);
      EXPECT_LE(r, ShapeBounds::kRadiusMax);
    }
    EXPECT_GE(pose.pitch, 0.0);
    EXPECT_LE(pose.pitch, 20.0);
    AppearanceParams a;
    a.albedo = ColorMap(1, 1, Color::Constant(x));
    a.env = EnvironmentMap(1, 1, x);
    a.shininess = a.specular = x;
    EXPECT_GE(a.albedo_values()[0].minCoeff(), 0.0);
    EXPECT_LE(a.albedo_values()[0].maxCoeff(), 1.0);
    EXPECT_GE(a.shininess_value(), 1.0);
    EXPECT_LE(a.shininess_value(), 196.0);
    EXPECT_GE(a.specular_albedo_value(), 0.0);
    EXPECT_LE(a.specular_albedo_value(), 2.0);
  }
}

TEST(Config, ValidationRejectsBadValues) {
  OptimizerConfig c;
  EXPECT_NO_THROW(validate(c));
  c.map_learning_rate = 0.0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.grid_columns = 50;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.patches.size = 6;
  EXPECT_THROW(validate(c), std::invalid_argument);
}

// Central differences with h = 1e-4 against the analytic gradient, on
// random 16 x 16 problems with a 4 x 12 environment.
TEST(AppearanceGradient, MatchesFiniteDifferences) {
  PatchConfig patches;
  patches.size = 4;
  patches.count = 16;
  LossWeights w;
  w.sad = 0.5;  // large enough that the patch term shows up in the check
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(100 + trial);
    AppearanceObjective obj(random_problem(rng, 16, 16, 4, 12), w, patches);
    AppearanceParams a = random_params(rng, obj.problem());
    const SadSelection sel = obj.select_patches(a, rng);
    ASSERT_FALSE(sel.groups.skipped);
    AppearanceParams g;
    obj.evaluate(a, &sel, &g);
    AppearanceParams gcopy = g;
    const auto x = coordinates(a);
    const auto gx = coordinates(gcopy);
    const double h = 1e-4;
    double scale = 0.0;
    for (double* v : gx) scale = std::max(scale, std::abs(*v));
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double keep = *x[i];
      *x[i] = keep + h;
      const double up = obj.evaluate(a, &sel);
      *x[i] = keep - h;
      const double down = obj.evaluate(a, &sel);
      *x[i] = keep;
      const double fd = (up - down) / (2 * h);
      // Relative to the coordinate, with a floor at 1e-4 of the largest
      // component so that near-zero entries are judged on absolute error.
      const double rel = std::abs(fd - *gx[i]) / std::max({std::abs(fd), std::abs(*gx[i]), 1e-4 * scale});
      worst = std::max(worst, rel);
      EXPECT_LT(rel, 1e-4) << "trial " << trial << " coordinate " << i << " analytic " << *gx[i] << " fd " << fd;
    }
  }
  RecordProperty("worst_relative_error", std::to_string(worst));
}

TEST(AppearanceGradient, DiffuseTermDoesNotDependOnAlbedo) {
  Rng rng(7);
  LossWeights w;
  w.image = w.albedo = w.sad = 0.0;
  w.diffuse = 1.0;
  w.diffuse_target = 5.0;  // far from the current mean so the term is active
  PatchConfig patches;
  patches.size = 4;
  AppearanceObjective obj(random_problem(rng, 8, 8, 4, 12), w, patches);
  const AppearanceParams a = random_params(rng, obj.problem());
  AppearanceParams g;
  AppearanceEvaluation d;
  obj.evaluate(a, nullptr, &g, &d);
  ASSERT_GT(d.terms.diffuse, 0.0);
  for (const Color& c : g.albedo) EXPECT_EQ(c, Color::Zero());
  double env_norm = 0.0;
  for (double v : g.env) env_norm += v * v;
  EXPECT_GT(env_norm, 0.0);
}

TEST(AppearanceGradient, VanishesAtAnExactFit) {
  Rng rng(8);
  AppearanceProblem p = random_problem(rng, 1, 1, 4, 12, 0.0);
  p.normals[0] = Vec3(0, 0, -1);
  p.views[0] = Vec3(0, 0, -1);
  const AppearanceParams a = make_params(ColorMap(1, 1, Color(0.4, 0.5, 0.6)), EnvironmentMap(4, 12, 0.2), 20.0, 0.3);
  // Render the target with the same objective, then refit against it.
  LossWeights w;
  w.sad = 0.0;
  PatchConfig patches;
  patches.size = 4;
  AppearanceEvaluation d;
  {
    AppearanceObjective probe(p, w, patches);
    probe.evaluate(a, nullptr, nullptr, &d);
  }
  p.target = d.rendered;
  // Keep the brightness prior inside its margin.
  double mean = d.diffuse[0];
  w.diffuse_target = mean;
  AppearanceObjective obj(p, w, patches);
  AppearanceParams g;
  AppearanceEvaluation e;
  EXPECT_EQ(obj.evaluate(a, nullptr, &g, &e), 0.0);
  double norm = 0.0;
  for (double* v : coordinates(g)) norm += *v * *v;
  EXPECT_LT(std::sqrt(norm), 1e-8);
}

TEST(AppearanceInit, MatchesDiffuseTargetAndBounds) {
  Rng rng(9);
  PatchConfig patches;
  patches.size = 4;
  const LossWeights w;
  AppearanceObjective obj(random_problem(rng, 8, 8, 4, 12), w, patches);
  const AppearanceParams a = initial_appearance(obj, w);
  AppearanceEvaluation d;
  obj.evaluate(a, nullptr, nullptr, &d);
  double mean = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < d.diffuse.size(); ++i)
    if (obj.problem().valid[i]) {
      mean += d.diffuse[i];
      ++n;
    }
  EXPECT_NEAR(mean / n, w.diffuse_target, 1e-6);
  EXPECT_NEAR(a.shininess_value(), 30.0, 1e-9);
  EXPECT_NEAR(a.specular_albedo_value(), 0.5, 1e-9);
  for (const Color& c : a.albedo_values()) {
    EXPECT_GE(c.minCoeff(), 0.01 - 1e-12);
    EXPECT_LE(c.maxCoeff(), 0.99 + 1e-12);
  }
}

TEST(ShapeEstimate, RecoversAnUprightCylinder) {
  Camera cam;
  cam.width = cam.height = 128;
  const RadiusProfile truth{std::vector<double>(32, 0.3), 0.8};
  const CameraPose pose{0.0, 0.0, 0.05, -0.04};
  const ScalarMap s = rasterize_silhouette(revolve(truth, 96), pose, cam);
  const ShapeEstimate e = estimate_shape(s, cam, 32, 0.0);
  const double px = cam.distance() / cam.focal_px();
  EXPECT_NEAR(e.profile.height, 0.8, 3 * px);
  EXPECT_NEAR(e.pose.tx, 0.05, 2 * px);
  EXPECT_NEAR(e.pose.ty, -0.04, 2 * px);
  for (double r : e.profile.radii) EXPECT_NEAR(r, 0.3, 2 * px);
}

TEST(ShapeFit, GroundTruthIsStationary) {
  const SynthConfig cfg = small_synth();
  const GeneratedScene g = generate_scene(5, cfg);
  OptimizerConfig oc;
  oc.shape_iterations = 10;
  const ShapeFit f = fit_shape(g.truth.silhouette, cfg.camera, g.scene.profile, g.scene.pose, oc, LossWeights{});
  EXPECT_NEAR(f.loss, f.initial_loss, 1e-6);
  EXPECT_EQ(f.iterations, 10);
}

TEST(ShapeFit, RecoversPerturbedRadii) {
  const SynthConfig cfg = small_synth(128);
  const GeneratedScene g = generate_scene(1, cfg);
  RadiusProfile start = g.scene.profile;
  Rng rng(3);
  for (double& r : start.radii) r *= rng.uniform() < 0.5 ? 0.9 : 1.1;
  OptimizerConfig oc;
  oc.shape_iterations = 300;
  const ShapeFit f = fit_shape(g.truth.silhouette, cfg.camera, start, g.scene.pose, oc, LossWeights{});
  double mae = 0.0;
  for (std::size_t l = 0; l < start.radii.size(); ++l) mae += std::abs(f.profile.radii[l] - g.scene.profile.radii[l]);
  mae /= double(start.radii.size());
  EXPECT_LT(mae, 0.02);
  EXPECT_LT(f.loss, f.initial_loss);
}

TEST(ShapeFit, RejectsEmptySilhouette) {
  Camera cam;
  cam.width = cam.height = 32;
  EXPECT_THROW(fit_shape(ScalarMap(32, 32, 0.0), cam, neutral_profile(32), neutral_pose(), OptimizerConfig{},
                         LossWeights{}),
               std::invalid_argument);
}

TEST(AppearanceFit, StartingAtGroundTruthDoesNotDrift) {
  const SynthConfig cfg = small_synth();
  const GeneratedScene g = generate_scene(2, cfg);
  OptimizerConfig oc;
  oc.appearance_iterations = 50;
  oc.tex_rows = oc.tex_cols = cfg.tex_rows;
  oc.patches.size = 8;
  const AppearanceProblem problem =
      make_appearance_problem(g.truth.image, g.truth.silhouette, g.scene.profile, g.scene.pose, cfg.camera, oc);
  const AppearanceParams start =
      make_params(g.truth.albedo, g.scene.env, g.scene.material.shininess, g.scene.material.specular_albedo);
  const AppearanceFit f = fit_appearance(problem, oc, LossWeights{}, start);
  EXPECT_LE(f.loss, f.initial_loss);
  EXPECT_LE(f.trace.back().total, f.initial_loss * 1.05);
}

TEST(Relight, ReproducesTheForwardRender) {
  const SynthConfig cfg = small_synth();
  const GeneratedScene g = generate_scene(6, cfg);
  Decomposition d{g.scene.profile, g.scene.pose, g.scene.material, g.scene.env};
  d.material.albedo = g.truth.albedo;
  const ColorMap img = relight(d, cfg.camera, cfg.grid_columns);
  // Pixels whose surface lies in the frontal band agree with the original
  // render; elsewhere the replicated albedo differs.
  const VertexGrid grid = revolve(d.profile, cfg.grid_columns);
  const Band band = frontal_band(grid, d.pose, cfg.camera);
  const Mask front = rasterize_texture(grid, band, d.pose, cfg.camera, ColorMap(1, 1, Color::Ones())).coverage;
  double err = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < img.size(); ++i)
    if (front[i]) {
      err += (img[i] - g.truth.image[i]).cwiseAbs().sum() / 3.0;
      ++n;
    }
  ASSERT_GT(n, 100);
  EXPECT_LT(err / n, 0.01);
}

TEST(Relight, SpecularAlbedoOnlyBrightens) {
  const SynthConfig cfg = small_synth();
  const GeneratedScene g = generate_scene(7, cfg);
  Decomposition d{g.scene.profile, g.scene.pose, g.scene.material, g.scene.env};
  d.material.albedo = g.truth.albedo;
  d.material.specular_albedo = 0.8;
  const ColorMap shiny = relight(d, cfg.camera, cfg.grid_columns);
  d.material.specular_albedo = 0.0;
  const ColorMap matte = relight(d, cfg.camera, cfg.grid_columns);
  double gain = 0.0;
  for (std::size_t i = 0; i < shiny.size(); ++i) {
    for (int c = 0; c < 3; ++c) EXPECT_GE(shiny[i][c], matte[i][c] - 1e-12);
    gain += (shiny[i] - matte[i]).sum();
  }
  EXPECT_GT(gain, 0.0);
}

TEST(Relight, HighlightFollowsTheLight) {
  const SynthConfig cfg = small_synth();
  const GeneratedScene g = generate_scene(8, cfg);
  Decomposition d{g.scene.profile, g.scene.pose, g.scene.material, g.scene.env};
  d.material.albedo = ColorMap(cfg.tex_rows, cfg.tex_cols, Color::Constant(0.2));
  d.material.shininess = 150.0;
  d.material.specular_albedo = 1.0;
  EnvironmentMap left(cfg.env_rows, cfg.env_cols, 0.0), right = left;
  // One bright pixel each side of the viewing direction, level with the camera.
  const int row = cfg.env_rows / 2, front = cfg.env_cols / 2;
  left(row, front - 4) = 1.0;
  right(row, front + 4) = 1.0;
  auto brightest_column = [&](const EnvironmentMap& e) {
    const ColorMap img = relight(d, cfg.camera, cfg.grid_columns, e);
    std::size_t best = 0;
    for (std::size_t i = 0; i < img.size(); ++i)
      if (img[i].sum() > img[best].sum()) best = i;
    return static_cast<int>(best % static_cast<std::size_t>(img.cols()));
  };
  EXPECT_NE(brightest_column(left), brightest_column(right));
}
