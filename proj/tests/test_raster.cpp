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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "lathe/raster.hpp"
#include "lathe/rng.hpp"

using namespace lathe;

namespace {

constexpr double kPi = std::numbers::pi;

RadiusProfile constant_profile(int L, double r, double h = 0.8) {
  return RadiusProfile{std::vector<double>(static_cast<std::size_t>(L), r), h};
}

RadiusProfile sphere_profile(int L, double radius) {
  RadiusProfile p;
  p.height = 2.0 * radius;
  for (int l = 0; l < L; ++l) {
    const double y = -radius + 2.0 * radius * l / (L - 1);
    p.radii.push_back(std::sqrt(std::max(0.0, radius * radius - y * y)));
  }
  return p;
}

RadiusProfile vase_profile(int L) {
  RadiusProfile p;
  p.height = 0.8;
  for (int l = 0; l < L; ++l) p.radii.push_back(0.25 + 0.1 * std::sin(2.5 * l / (L - 1) * kPi));
  return p;
}

double area(const ScalarMap& s) {
  double a = 0.0;
  for (double v : s) a += v;
  return a;
}

Camera small_camera(int size = 128) {
  Camera cam;
  cam.width = size;
  cam.height = size;
  return cam;
}

// Smooth texture periodic in columns.
ColorMap smooth_texture(int rows, int cols) {
  ColorMap t(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double u = (r + 0.5) / rows, v = (c + 0.5) / cols;
      t(r, c) = Color(0.5 + 0.3 * std::sin(2 * kPi * v), 0.5 + 0.3 * std::cos(kPi * u), 0.4 + 0.2 * u * (1 - u));
    }
  }
  return t;
}

double brute_distance(const Mask& m, int r, int c) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (m(i, j)) best = std::min(best, std::hypot(double(i - r), double(j - c)));
  return best;
}

}  // namespace

TEST(Silhouette, CylinderIsMirrorSymmetric) {
  const Camera cam = small_camera();
  const SilhouetteImage s = rasterize_silhouette(revolve(constant_profile(16, 0.3), 96), CameraPose{}, cam);
  for (int r = 0; r < cam.height; ++r)
    for (int c = 0; c < cam.width; ++c) EXPECT_NEAR(s(r, c), s(r, cam.width - 1 - c), 0.2) << r << " " << c;
  // Width of the centre row: tangent lines from the camera to a circle of
  // radius r at distance D, plus half a pixel of soft edge on each side.
  const double D = cam.distance(), r = 0.3;
  double row_sum = 0.0;
  for (int c = 0; c < cam.width; ++c) row_sum += s(cam.height / 2, c);
  EXPECT_NEAR(row_sum, 2 * cam.focal_px() * r / std::sqrt(D * D - r * r) + 1.0, 1.0);
}

TEST(Silhouette, ValuesInUnitIntervalWithSolidInterior) {
  const Camera cam = small_camera();
  const SilhouetteImage s =
      rasterize_silhouette(revolve(vase_profile(32), 96), CameraPose{12.0, -5.0, 0.1, -0.05}, cam);
  for (double v : s) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_EQ(s(64 - 6, 64 + 13), 1.0);
  EXPECT_EQ(s(2, 2), 0.0);
}

TEST(Silhouette, ScalingRadiiGrowsAndContains) {
  const Camera cam = small_camera();
  RadiusProfile p = vase_profile(32);
  const SilhouetteImage small = rasterize_silhouette(revolve(p, 96), CameraPose{8, 3, 0, 0}, cam);
  for (double& r : p.radii) r *= 2;
  const SilhouetteImage big = rasterize_silhouette(revolve(p, 96), CameraPose{8, 3, 0, 0}, cam);
  EXPECT_GT(area(big), area(small));
  // Every pixel fully inside the small shape is inside the big one.
  for (std::size_t i = 0; i < small.size(); ++i)
    if (small[i] == 1.0) EXPECT_EQ(big[i], 1.0);
}

TEST(Silhouette, SphereMatchesProjectedDisk) {
  const Camera cam;
  const double rho = 0.5;
  const SilhouetteImage s = rasterize_silhouette(revolve(sphere_profile(64, rho), 192), CameraPose{}, cam);
  // A sphere at distance D projects to a disk of radius f rho / sqrt(D^2 - rho^2).
  const double D = cam.distance();
  const double radius = cam.focal_px() * rho / std::sqrt(D * D - rho * rho);
  EXPECT_NEAR(area(s), kPi * radius * radius, 0.02 * kPi * radius * radius);
}

TEST(Silhouette, RejectsObjectBehindCamera) {
  const Camera cam = small_camera();
  const VertexGrid g = revolve(constant_profile(4, 0.3), 16);
  const CameraPose pose{};
  VertexGrid moved = g;
  for (Vec3& p : moved) p.z() -= 2 * cam.distance();
  EXPECT_THROW(rasterize_silhouette(moved, pose, cam), std::invalid_argument);
}

TEST(Silhouette, ContinuousInRadius) {
  const Camera cam = small_camera();
  RadiusProfile p = vase_profile(32);
  const double a0 = area(rasterize_silhouette(revolve(p, 96), CameraPose{}, cam));
  auto grown = [&](double dr) {
    RadiusProfile q = p;
    for (double& r : q.radii) r += dr;
    return area(rasterize_silhouette(revolve(q, 96), CameraPose{}, cam)) - a0;
  };
  // Area changes in proportion to the perturbation, with no jumps.
  const double d1 = grown(1e-5), d2 = grown(2e-5);
  EXPECT_GT(d1, 0.0);
  EXPECT_NEAR(d2 / d1, 2.0, 0.05);
  EXPECT_LT(grown(1e-7), 0.01);
}

TEST(TextureRender, ConstantTextureGivesConstantImage) {
  const Camera cam = small_camera();
  const VertexGrid g = revolve(vase_profile(32), 96);
  const Band band = frontal_band(g, CameraPose{}, cam);
  const TextureRender tr = rasterize_texture(g, band, CameraPose{}, cam, ColorMap(16, 16, Color(1, 0, 0)));
  int covered = 0;
  for (std::size_t i = 0; i < tr.image.size(); ++i) {
    if (tr.coverage[i]) {
      ++covered;
      EXPECT_LT((tr.image[i] - Color(1, 0, 0)).norm(), 1e-9);
    } else {
      EXPECT_EQ(tr.image[i], Color::Zero());
    }
  }
  EXPECT_GT(covered, 500);
}

TEST(TextureRender, CheckerboardStripesHaveEqualWidthAtCentre) {
  const Camera cam;
  const VertexGrid g = revolve(constant_profile(8, 0.4), 96);
  const Band band = frontal_band(g, CameraPose{}, cam);
  // One texel per face column, alternating.
  ColorMap tex(4, 32);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 32; ++c) tex(r, c) = (c % 2) ? Color::Ones() : Color::Zero();
  // Nearest-ish sampling: upsample so bilinear blur is confined to edges.
  ColorMap up(4, 32 * 16);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < up.cols(); ++c) up(r, c) = tex(r, c / 16);
  const TextureRender tr = rasterize_texture(g, band, CameraPose{}, cam, up);
  const int row = cam.height / 2;
  std::vector<int> edges;
  for (int c = 1; c < cam.width; ++c) {
    if (!tr.coverage(row, c) || !tr.coverage(row, c - 1)) continue;
    if ((tr.image(row, c)[0] > 0.5) != (tr.image(row, c - 1)[0] > 0.5)) edges.push_back(c);
  }
  // Stripe widths near the centre: f * r * (2 pi / 96) / D.
  const double expected = cam.focal_px() * 0.4 * (2 * kPi / 96) / (cam.distance() - 0.4);
  int checked = 0;
  for (std::size_t i = 1; i < edges.size(); ++i) {
    const double mid = 0.5 * (edges[i] + edges[i - 1]);
    if (std::abs(mid - cam.width / 2.0) > 20) continue;
    EXPECT_NEAR(edges[i] - edges[i - 1], expected, 1.0);
    ++checked;
  }
  EXPECT_GE(checked, 3);
}

TEST(TextureRender, ColumnShiftKeepsCoverage) {
  const Camera cam = small_camera();
  const VertexGrid g = revolve(vase_profile(32), 96);
  const Band band = whole_band(frontal_band(g, CameraPose{}, cam));
  const ColorMap tex = smooth_texture(16, 48);
  ColorMap shifted(16, 48);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 48; ++c) shifted(r, (c + 1) % 48) = tex(r, c);
  const TextureRender a = rasterize_texture(g, band, CameraPose{5, 2, 0, 0}, cam, tex);
  const TextureRender b = rasterize_texture(g, band, CameraPose{5, 2, 0, 0}, cam, shifted);
  EXPECT_EQ(a.coverage, b.coverage);
  EXPECT_NE(a.image, b.image);
}

TEST(TextureRender, FrontalCoverageInsideSilhouette) {
  Rng rng(3);
  const Camera cam = small_camera();
  for (int trial = 0; trial < 6; ++trial) {
    RadiusProfile p;
    p.height = rng.uniform(0.5, 0.95);
    for (int l = 0; l < 32; ++l) p.radii.push_back(rng.uniform(0.05, 0.5));
    const CameraPose pose{rng.uniform(0, 20), rng.uniform(-10, 10), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
    const VertexGrid g = revolve(p, 96);
    const SilhouetteImage s = rasterize_silhouette(g, pose, cam);
    const TextureRender tr = rasterize_texture(g, frontal_band(g, pose, cam), pose, cam, ColorMap(4, 4, Color::Ones()));
    for (std::size_t i = 0; i < s.size(); ++i)
      if (tr.coverage[i]) EXPECT_EQ(s[i], 1.0);
  }
}

TEST(Unwrap, RoundTripRecoversSmoothTexture) {
  const Camera cam;
  const VertexGrid g = revolve(vase_profile(32), 96);
  const CameraPose pose{8.0, 3.0, 0.0, 0.0};
  const Band band = frontal_band(g, pose, cam);
  const ColorMap tex = smooth_texture(64, 64);
  const TextureRender tr = rasterize_texture(g, band, pose, cam, tex);
  const UnwrappedTexture u = unwrap(g, band, pose, cam, tr.image, 64, 64);
  double err = 0.0;
  int n = 0;
  for (int r = 2; r < 62; ++r) {
    for (int c = 2; c < 62; ++c) {
      if (!u.valid(r, c)) continue;
      err += (u.values(r, c) - tex(r, c)).cwiseAbs().mean();
      ++n;
    }
  }
  ASSERT_GT(n, 2000);
  EXPECT_LT(err / n, 0.02);
}

TEST(Unwrap, RoundTripImprovesWithResolution) {
  const Camera cam;
  const VertexGrid g = revolve(vase_profile(32), 96);
  const Band band = frontal_band(g, CameraPose{}, cam);
  auto error_at = [&](int size) {
    const ColorMap tex = smooth_texture(size, size);
    const TextureRender tr = rasterize_texture(g, band, CameraPose{}, cam, tex);
    const UnwrappedTexture u = unwrap(g, band, CameraPose{}, cam, tr.image, size, size);
    // Same surface region at every resolution, away from the silhouette.
    double err = 0.0;
    int n = 0;
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        const double s = (r + 0.5) / size, t = (c + 0.5) / size;
        if (s < 0.1 || s > 0.9 || t < 0.1 || t > 0.9 || !u.valid(r, c)) continue;
        err += (u.values(r, c) - tex(r, c)).cwiseAbs().mean();
        ++n;
      }
    }
    return err / n;
  };
  const double e64 = error_at(64), e128 = error_at(128), e256 = error_at(256);
  EXPECT_GE(e64, e128);
  EXPECT_GE(e128, e256);
}

TEST(Unwrap, ConstantAndBlackImages) {
  const Camera cam = small_camera();
  const VertexGrid g = revolve(vase_profile(32), 96);
  const Band band = frontal_band(g, CameraPose{}, cam);
  const UnwrappedTexture c = unwrap(g, band, CameraPose{}, cam, ColorMap(128, 128, Color(0.2, 0.4, 0.6)), 32, 32);
  const UnwrappedTexture b = unwrap(g, band, CameraPose{}, cam, ColorMap(128, 128, Color::Zero()), 32, 32);
  int valid = 0;
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    if (c.valid[i]) {
      ++valid;
      EXPECT_LT((c.values[i] - Color(0.2, 0.4, 0.6)).norm(), 1e-12);
    } else {
      EXPECT_EQ(c.values[i], Color::Zero());
    }
    EXPECT_EQ(b.values[i], Color::Zero());
  }
  EXPECT_GT(valid, 32 * 32 / 2);
}

TEST(Unwrap, GrazingTexelsAreInvalid) {
  const Camera cam = small_camera();
  const VertexGrid g = revolve(constant_profile(8, 0.4), 96);
  const Band band = whole_band(frontal_band(g, CameraPose{}, cam));
  const UnwrappedTexture u = unwrap(g, band, CameraPose{}, cam, ColorMap(128, 128, Color::Ones()), 8, 96);
  // The middle third faces the camera, the outer columns face away.
  EXPECT_TRUE(u.valid(4, 48));
  EXPECT_FALSE(u.valid(4, 0));
  EXPECT_FALSE(u.valid(4, 95));
}

TEST(DistanceTransform, AllForegroundIsZero) {
  const DistanceField d = distance_transform(Mask(8, 9, 1));
  EXPECT_FALSE(d.empty_foreground);
  for (double v : d.distance) EXPECT_EQ(v, 0.0);
}

TEST(DistanceTransform, PythagoreanTriple) {
  Mask m(20, 20, 0);
  m(4, 6) = 1;
  const DistanceField d = distance_transform(m);
  EXPECT_DOUBLE_EQ(d.distance(7, 10), 5.0);
  EXPECT_EQ(d.distance(4, 6), 0.0);
}

TEST(DistanceTransform, EmptyForegroundIsFlagged) {
  const DistanceField d = distance_transform(Mask(3, 4, 0));
  EXPECT_TRUE(d.empty_foreground);
  for (double v : d.distance) EXPECT_DOUBLE_EQ(v, 5.0);
}

TEST(DistanceTransform, MatchesBruteForce) {
  Rng rng(17);
  for (int trial = 0; trial < 4; ++trial) {
    Mask m(64, 64, 0);
    const double density = 0.002 + 0.05 * trial;
    for (auto& v : m) v = rng.uniform() < density ? 1 : 0;
    m(rng.index(64), rng.index(64)) = 1;
    const DistanceField d = distance_transform(m);
    for (int r = 0; r < 64; ++r)
      for (int c = 0; c < 64; ++c) ASSERT_DOUBLE_EQ(d.distance(r, c), brute_distance(m, r, c)) << r << "," << c;
  }
}

TEST(DistanceTransform, ZeroOnSilhouetteIffContained) {
  Mask inner(16, 16, 0), outer(16, 16, 0);
  for (int r = 4; r < 10; ++r)
    for (int c = 4; c < 10; ++c) inner(r, c) = 1;
  for (int r = 3; r < 12; ++r)
    for (int c = 3; c < 12; ++c) outer(r, c) = 1;
  auto dt_sum = [](const Mask& target, const Mask& pred) {
    const DistanceField d = distance_transform(target);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += d.distance[i] * pred[i];
    return s;
  };
  EXPECT_EQ(dt_sum(outer, inner), 0.0);
  EXPECT_GT(dt_sum(inner, outer), 0.0);
}

TEST(Sampling, BilinearCentresAndWrap) {
  ColorMap m(2, 4);
  for (int c = 0; c < 4; ++c) {
    m(0, c) = Color::Constant(c);
    m(1, c) = Color::Constant(10 + c);
  }
  EXPECT_EQ(sample_bilinear(m, 2.5, 0.5), Color::Constant(2));
  EXPECT_EQ(sample_bilinear(m, 2.0, 1.0), Color::Constant(6.5));
  // Column 4 wraps to column 0, or clamps to column 3.
  EXPECT_EQ(sample_bilinear(m, 4.0, 0.5, true), Color::Constant(1.5));
  EXPECT_EQ(sample_bilinear(m, 4.0, 0.5, false), Color::Constant(3));
  EXPECT_EQ(sample_bilinear(m, 1.5, -3.0), Color::Constant(1));
}
