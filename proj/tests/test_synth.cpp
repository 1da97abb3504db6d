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
#include <numbers>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "lathe/raster.hpp"
#include "lathe/synth.hpp"

using namespace lathe;

namespace {

SynthConfig small_config() {
  SynthConfig c;
  c.camera.width = c.camera.height = 64;
  c.tex_rows = c.tex_cols = 32;
  c.env_rows = 8;
  c.env_cols = 24;
  return c;
}

}  // namespace

TEST(SorCurve, ZeroAmplitudesGiveConstantRadius) {
  const auto r = sor_curve({0.37, 0, 1, 2, 0, 3, 4}, 32);
  ASSERT_EQ(r.size(), 32u);
  for (double v : r) EXPECT_DOUBLE_EQ(v, 0.37);
}

TEST(SorCurve, MatchesClosedFormAtBothEnds) {
  const SorCurveParams p{0.2, 0.1, 0.7, 1.9, 0.05, 0.4, 2.5};
  const int L = 32;
  const auto r = sor_curve(p, L);
  EXPECT_NEAR(r[0], 0.2 + 0.1 * (1 + std::sin(0.7)) + 0.05 * (1 + std::sin(0.4)), 1e-12);
  const double u = double(L - 1) / L;
  EXPECT_NEAR(r[L - 1], 0.2 + 0.1 * (1 + std::sin((1 - u) * 0.7 + u * 1.9)) + 0.05 * (1 + std::sin(0.4 + u * 2.5)),
              1e-12);
}

TEST(SorCurve, SampledProfilesRespectBounds) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(seed);
    const RadiusProfile p = sample_sor_curve(rng, 32);
    ASSERT_EQ(p.rows(), 32);
    EXPECT_GT(p.height, 0.5);
    EXPECT_LT(p.height, 0.95);
    for (double r : p.radii) {
      EXPECT_GE(r, 0.05);
      EXPECT_LE(r, 0.9);
    }
  }
}

TEST(SamplePose, RangesHold) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const CameraPose p = sample_pose(rng);
    EXPECT_GT(p.pitch, 0.0);
    EXPECT_LT(p.pitch, 20.0);
    EXPECT_GT(p.roll, -10.0);
    EXPECT_LT(p.roll, 10.0);
    EXPECT_LT(std::abs(p.tx), 0.1);
    EXPECT_LT(std::abs(p.ty), 0.1);
  }
}

TEST(SampleMaterial, ShininessIsUniformOnItsRange) {
  Rng rng(11);
  double sum = 0.0;
  const int n = 3000;
  for (int i = 0; i < n; ++i) {
    const MaterialParams m = sample_material(rng, 4, 12);
    EXPECT_GT(m.shininess, 1.0);
    EXPECT_LT(m.shininess, 196.0);
    EXPECT_GT(m.specular_albedo, 0.1);
    EXPECT_LT(m.specular_albedo, 1.0);
    sum += m.shininess;
  }
  // Mean of U(1, 196) is 98.5 with standard error 56.3 / sqrt(n) ~ 1.03.
  EXPECT_NEAR(sum / n, 98.5, 4.0);
}

TEST(Albedo, GeneratorsStayInRange) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(seed);
    const ColorMap a = procedural_albedo(rng, 16, 48);
    for (const Color& c : a) {
      EXPECT_GE(c.minCoeff(), 0.05);
      EXPECT_LE(c.maxCoeff(), 0.95);
    }
  }
}

TEST(Albedo, BandsFollowPalette) {
  const std::vector<Color> pal{Color(0.1, 0.2, 0.3), Color(0.7, 0.6, 0.5)};
  const ColorMap a = band_albedo(10, 4, pal);
  EXPECT_EQ(a(0, 0), pal[0]);
  EXPECT_EQ(a(4, 3), pal[0]);
  EXPECT_EQ(a(5, 0), pal[1]);
  EXPECT_EQ(a(9, 2), pal[1]);
}

TEST(Albedo, StripesAlternate) {
  const Color a(0.2, 0.2, 0.2), b(0.8, 0.8, 0.8);
  const ColorMap m = stripe_albedo(2, 60, 6, a, b);
  int changes = 0;
  for (int c = 0; c < 60; ++c)
    if (m(0, c) != m(0, (c + 1) % 60)) ++changes;
  EXPECT_EQ(changes, 6);  // periodic: the wrap joins unlike stripes
}

TEST(Albedo, TwoToneSplit) {
  const Color a(0.2, 0.3, 0.4), b(0.6, 0.5, 0.4);
  const ColorMap m = two_tone_albedo(10, 3, 0.3, a, b);
  EXPECT_EQ(m(2, 1), a);
  EXPECT_EQ(m(3, 1), b);
}

TEST(Albedo, NoiseIsPeriodicInColumnsAndMixesEndpoints) {
  double mean = 0.0;
  int n = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const Color a(0.2, 0.2, 0.2), b(0.8, 0.8, 0.8);
    const ColorMap m = noise_albedo(rng, 12, 48, 6, a, b);
    for (int r = 0; r < 12; ++r) {
      // Adjacent across the seam differ no more than typical neighbours.
      EXPECT_LT((m(r, 0) - m(r, 47)).norm(), 0.2);
      for (int c = 0; c < 48; ++c) {
        EXPECT_GE(m(r, c).minCoeff(), 0.2 - 1e-12);
        EXPECT_LE(m(r, c).maxCoeff(), 0.8 + 1e-12);
        mean += m(r, c).x();
        ++n;
      }
    }
  }
  mean /= n;
  EXPECT_GT(mean, 0.3);
  EXPECT_LT(mean, 0.7);
}

TEST(Albedo, IdentityJitterOnlyClamps) {
  ColorMap m(2, 2, Color(0.5, 0.01, 0.99));
  m(1, 1) = Color(0.3, 0.4, 0.6);
  const ColorMap j = apply_jitter(m, {});
  EXPECT_TRUE(j(0, 0).isApprox(Color(0.5, 0.05, 0.95), 1e-12));
  EXPECT_TRUE(j(1, 1).isApprox(Color(0.3, 0.4, 0.6), 1e-12));
}

TEST(Albedo, HueRotationKeepsGreyAndChannelSum) {
  ColorMap m(1, 2, Color(0.4, 0.4, 0.4));
  m(0, 1) = Color(0.3, 0.5, 0.6);
  const ColorMap j = apply_jitter(m, {0.4, 0.0, 1.0});
  EXPECT_TRUE(j(0, 0).isApprox(Color(0.4, 0.4, 0.4), 1e-12));
  EXPECT_NEAR(j(0, 1).sum(), 1.4, 1e-12);
  EXPECT_NEAR((j(0, 1) - Color::Constant(j(0, 1).mean())).norm(),
              (m(0, 1) - Color::Constant(m(0, 1).mean())).norm(), 1e-12);
}

TEST(Lighting, LobesLieInUpperFrontQuarter) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    for (const auto& l : sample_sg_lobes(rng)) {
      EXPECT_NEAR(l.axis.norm(), 1.0, 1e-12);
      EXPECT_GE(l.axis.y(), 0.0);
      EXPECT_LE(l.axis.z(), 1e-12);
      EXPECT_GT(l.bandwidth, 10.0);
      EXPECT_LT(l.bandwidth, 30.0);
      EXPECT_GT(l.intensity, 0.1);
      EXPECT_LT(l.intensity, 0.3);
    }
  }
}

TEST(Lighting, RadianceBoundedAndPeaksTowardsLobes) {
  Rng rng(8);
  const EnvironmentMap e = sample_sg_lighting(rng, 16, 48);
  double upper = 0.0, lower = 0.0;
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 48; ++c) {
      EXPECT_GE(e(r, c), 0.0);
      EXPECT_LE(e(r, c), 1.0);
      (r < 8 ? upper : lower) += e(r, c);
    }
  EXPECT_GT(upper, lower);
}

TEST(Scene, GenerationIsDeterministic) {
  const SynthConfig cfg = small_config();
  const GeneratedScene a = generate_scene(42, cfg);
  const GeneratedScene b = generate_scene(42, cfg);
  EXPECT_EQ(a.scene.profile.radii, b.scene.profile.radii);
  EXPECT_EQ(a.truth.image, b.truth.image);
  EXPECT_EQ(a.truth.albedo, b.truth.albedo);
  EXPECT_EQ(a.truth.silhouette, b.truth.silhouette);
}

TEST(Scene, DistinctSeedsGiveDistinctScenes) {
  const SynthConfig cfg = small_config();
  std::set<std::vector<double>> seen;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    seen.insert(sample_sor_curve(rng, cfg.profile_rows).radii);
  }
  EXPECT_EQ(seen.size(), 100u);
}

TEST(Scene, StoredMapsAreFloatExact) {
  const Scene s = sample_scene(4, small_config());
  for (const Color& c : s.material.albedo) EXPECT_EQ(c, c.cast<float>().cast<double>());
  for (double v : s.env) EXPECT_EQ(v, double(float(v)));
}

TEST(Scene, SilhouetteMatchesRasterizer) {
  const SynthConfig cfg = small_config();
  const GeneratedScene g = generate_scene(9, cfg);
  const ScalarMap s =
      rasterize_silhouette(revolve(g.scene.profile, cfg.grid_columns), g.scene.pose, cfg.camera);
  EXPECT_EQ(s, g.truth.silhouette);
}

TEST(Scene, GroundTruthComposesToTheRenderedTexture) {
  const SynthConfig cfg = small_config();
  const Scene s = sample_scene(12, cfg);
  const SceneRender r = render_scene(s, cfg);
  const GroundTruth gt = ground_truth(s, r, cfg);
  const ColorMap composed = compose_texture(gt.albedo, gt.diffuse, gt.specular, s.material.specular_albedo);
  const ColorMap texture = crop_columns(r.texture, cfg.tex_cols, cfg.tex_cols);
  const VectorMap views = crop_columns(r.views, cfg.tex_cols, cfg.tex_cols);
  int checked = 0;
  for (std::size_t i = 0; i < composed.size(); ++i) {
    if (gt.normals[i].dot(views[i]) <= 0.0) continue;  // inner wall uses dimmed albedo
    EXPECT_TRUE(composed[i].isApprox(texture[i], 1e-12));
    ++checked;
  }
  EXPECT_GT(checked, int(composed.size()) / 2);
}

TEST(Scene, DiffuseOnlyHasNoSpecularContribution) {
  SynthConfig cfg = small_config();
  cfg.diffuse_only = true;
  const Scene s = sample_scene(3, cfg);
  EXPECT_EQ(s.material.specular_albedo, 0.0);
  const SceneRender r = render_scene(s, cfg);
  for (std::size_t i = 0; i < r.texture.size(); ++i) {
    const Color want = (r.albedo[i] * r.diffuse[i]).unaryExpr([](double v) { return std::clamp(tonemap(v), 0.0, 1.0); });
    EXPECT_TRUE(r.texture[i].isApprox(want, 1e-12) || (r.texture[i] - want).norm() < 1e-12);
  }
}

TEST(Scene, EnvironmentIsRadianceTimesSolidAngle) {
  const SynthConfig cfg = small_config();
  const GeneratedScene g = generate_scene(2, cfg);
  const ScalarMap w = pixel_solid_angles(cfg.env_rows, cfg.env_cols);
  for (std::size_t i = 0; i < w.size(); ++i)
    EXPECT_NEAR(g.scene.env[i], g.truth.env_radiance[i] * w[i], 1e-7 * (1.0 + g.scene.env[i]));
}

TEST(Scene, ObjectsRarelyTouchTheFrame) {
  // Widest profiles (radius 0.9) plus translation and roll can just reach the
  // edge; at the default framing this is rare.
  const SynthConfig cfg;
  int touching = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Scene s = sample_scene(seed, cfg);
    const ScalarMap sil = rasterize_silhouette(revolve(s.profile, cfg.grid_columns), s.pose, cfg.camera);
    const int H = sil.rows(), W = sil.cols();
    bool edge = false;
    for (int i = 0; i < H; ++i) edge = edge || sil(i, 0) > 0 || sil(i, W - 1) > 0;
    for (int j = 0; j < W; ++j) edge = edge || sil(0, j) > 0 || sil(H - 1, j) > 0;
    touching += edge;
  }
  EXPECT_LE(touching, 2);
}
