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

#include "lathe/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Geometry>

namespace lathe {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAlbedoMin = 0.05;
constexpr double kAlbedoMax = 0.95;
constexpr double kRadiusMin = 0.05;
constexpr double kRadiusMax = 0.9;

Color random_color(Rng& rng, double lo, double hi) {
  const double r = rng.uniform(lo, hi);
  const double g = rng.uniform(lo, hi);
  const double b = rng.uniform(lo, hi);
  return {r, g, b};
}

double smoothstep(double x) { return x * x * (3.0 - 2.0 * x); }

}  // namespace

std::vector<double> sor_curve(const SorCurveParams& p, int L) {
  if (L < 2) throw std::invalid_argument("sor_curve: need at least two rows");
  std::vector<double> r(static_cast<std::size_t>(L));
  for (int i = 0; i < L; ++i) {
    const double u = double(i) / L;
    const double f1 = p.a1 * (1.0 + std::sin(double(L - i) / L * p.p1 + u * p.q1));
    const double f2 = p.a2 * (1.0 + std::sin(p.p2 + u * p.q2));
    r[static_cast<std::size_t>(i)] = p.t + f1 + f2;
  }
  return r;
}

RadiusProfile sample_sor_curve(Rng& rng, int L) {
  SorCurveParams p;
  p.t = rng.uniform(0.1, 0.3);
  p.a1 = rng.uniform(0.0, 0.3);
  p.p1 = rng.uniform(-kPi, 0.0);
  p.q1 = rng.uniform(kPi / 2, 2 * kPi);
  p.a2 = rng.uniform(0.0, 0.1);
  p.p2 = rng.uniform(0.0, 2 * kPi);
  p.q2 = rng.uniform(kPi / 2, 2 * kPi);
  RadiusProfile profile;
  profile.radii = sor_curve(p, L);
  for (double& r : profile.radii) r = std::clamp(r, kRadiusMin, kRadiusMax);
  profile.height = rng.uniform(0.5, 0.95);
  return profile;
}

CameraPose sample_pose(Rng& rng) {
  CameraPose pose;
  pose.pitch = rng.uniform(0.0, 20.0);
  pose.roll = rng.uniform(-10.0, 10.0);
  pose.tx = rng.uniform(-0.1, 0.1);
  pose.ty = rng.uniform(-0.1, 0.1);
  return pose;
}

ColorMap band_albedo(int rows, int cols, std::span<const Color> palette) {
  if (palette.empty()) throw std::invalid_argument("band_albedo: empty palette");
  const int n = static_cast<int>(palette.size());
  ColorMap out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const Color& c = palette[static_cast<std::size_t>(std::min(n - 1, r * n / rows))];
    for (int k = 0; k < cols; ++k) out(r, k) = c;
  }
  return out;
}

ColorMap stripe_albedo(int rows, int cols, int stripes, const Color& a, const Color& b) {
  if (stripes < 1) throw std::invalid_argument("stripe_albedo: need at least one stripe");
  ColorMap out(rows, cols);
  for (int k = 0; k < cols; ++k) {
    const int s = static_cast<int>(static_cast<long long>(k) * stripes / cols);
    for (int r = 0; r < rows; ++r) out(r, k) = (s % 2 == 0) ? a : b;
  }
  return out;
}

ColorMap two_tone_albedo(int rows, int cols, double split, const Color& a, const Color& b) {
  ColorMap out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int k = 0; k < cols; ++k) out(r, k) = (r + 0.5 < split * rows) ? a : b;
  return out;
}

ColorMap noise_albedo(Rng& rng, int rows, int cols, int cells, const Color& a, const Color& b) {
  if (cells < 1) throw std::invalid_argument("noise_albedo: need at least one cell");
  // Two octaves of value noise on a lattice that wraps across the columns.
  ScalarMap n(rows, cols, 0.0);
  double weight = 1.0, total = 0.0;
  for (int octave = 0; octave < 2; ++octave) {
    const int gx = cells << octave;
    const int gy = std::max(2, gx / 3) + 1;
    ScalarMap lattice(gy, gx);
    for (double& v : lattice) v = rng.uniform();
    for (int r = 0; r < rows; ++r) {
      const double y = (r + 0.5) / rows * (gy - 1);
      const int y0 = std::min(static_cast<int>(y), gy - 2);
      const double wy = smoothstep(y - y0);
      for (int k = 0; k < cols; ++k) {
        const double x = (k + 0.5) / cols * gx;
        const int x0 = static_cast<int>(x) % gx;
        const int x1 = (x0 + 1) % gx;
        const double wx = smoothstep(x - std::floor(x));
        const double top = (1 - wx) * lattice(y0, x0) + wx * lattice(y0, x1);
        const double bot = (1 - wx) * lattice(y0 + 1, x0) + wx * lattice(y0 + 1, x1);
        n(r, k) += weight * ((1 - wy) * top + wy * bot);
      }
    }
    total += weight;
    weight *= 0.5;
  }
  ColorMap out(rows, cols);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = n[i] / total;
    out[i] = (1 - t) * a + t * b;
  }
  return out;
}

ColorMap apply_jitter(const ColorMap& albedo, const ColorJitter& jitter) {
  const Mat3 hue = Eigen::AngleAxisd(jitter.hue, Vec3::Ones().normalized()).toRotationMatrix();
  ColorMap out(albedo.rows(), albedo.cols());
  for (std::size_t i = 0; i < albedo.size(); ++i) {
    Color c = hue * albedo[i];
    c = ((c.array() - 0.5) * jitter.contrast + 0.5 + jitter.brightness).matrix();
    out[i] = c.cwiseMax(kAlbedoMin).cwiseMin(kAlbedoMax);
  }
  return out;
}

ColorMap procedural_albedo(Rng& rng, int rows, int cols) {
  const auto style = static_cast<AlbedoStyle>(rng.index(4));
  ColorMap base;
  switch (style) {
    case AlbedoStyle::kBands: {
      std::vector<Color> palette(static_cast<std::size_t>(1 + rng.index(5)));
      for (Color& c : palette) c = random_color(rng, 0.15, 0.85);
      base = band_albedo(rows, cols, palette);
      break;
    }
    case AlbedoStyle::kStripes: {
      // An even count keeps the pattern periodic around the circle.
      const int stripes = 6 * (1 + rng.index(4));
      const Color a = random_color(rng, 0.15, 0.85);
      const Color b = random_color(rng, 0.15, 0.85);
      base = stripe_albedo(rows, cols, stripes, a, b);
      break;
    }
    case AlbedoStyle::kNoise: {
      const int cells = 3 * (2 + rng.index(4));
      const Color c = random_color(rng, 0.35, 0.65);
      const Color d = random_color(rng, -0.25, 0.25);
      base = noise_albedo(rng, rows, cols, cells, c + d, c - d);
      break;
    }
    case AlbedoStyle::kTwoTone: {
      const double split = rng.uniform(0.3, 0.7);
      const Color a = random_color(rng, 0.15, 0.85);
      const Color b = random_color(rng, 0.15, 0.85);
      base = two_tone_albedo(rows, cols, split, a, b);
      break;
    }
  }
  ColorJitter jitter;
  jitter.hue = rng.uniform(-0.5, 0.5);
  jitter.brightness = rng.uniform(-0.05, 0.05);
  jitter.contrast = rng.uniform(0.8, 1.2);
  return apply_jitter(base, jitter);
}

MaterialParams sample_material(Rng& rng, int rows, int cols) {
  MaterialParams m;
  m.shininess = rng.uniform(1.0, 196.0);
  m.specular_albedo = rng.uniform(0.1, 1.0);
  m.albedo = procedural_albedo(rng, rows, cols);
  return m;
}

std::vector<SphericalGaussianLobe> sample_sg_lobes(Rng& rng, int count) {
  std::vector<SphericalGaussianLobe> lobes;
  for (int k = 0; k < count; ++k) {
    // Uniform on the quarter sphere: cos(theta) uniform, azimuth in the
    // camera-facing half.
    const double y = rng.uniform(0.0, 1.0);
    const double phi = rng.uniform(kPi / 2, 3 * kPi / 2);
    const double s = std::sqrt(1.0 - y * y);
    SphericalGaussianLobe lobe;
    lobe.axis = Vec3(s * std::sin(phi), y, s * std::cos(phi)).normalized();
    lobe.bandwidth = rng.uniform(10.0, 30.0);
    lobe.intensity = rng.uniform(0.1, 0.3);
    lobes.push_back(lobe);
  }
  return lobes;
}

EnvironmentMap sample_sg_lighting(Rng& rng, int rows, int cols) {
  const auto lobes = sample_sg_lobes(rng);
  return sg_environment(lobes, rows, cols);
}

SceneRender render_scene(const Scene& scene, const SynthConfig& config) {
  const Camera& cam = config.camera;
  const int rows = config.tex_rows;
  const int cols = 3 * config.tex_cols;
  if (scene.material.albedo.rows() != rows || scene.material.albedo.cols() != cols)
    throw std::invalid_argument("render_scene: albedo must be tex_rows x 3 tex_cols");
  if (scene.env.rows() != config.env_rows || scene.env.cols() != config.env_cols)
    throw std::invalid_argument("render_scene: environment size does not match config");

  const VertexGrid grid = revolve(scene.profile, config.grid_columns);
  SceneRender out;
  out.frontal = frontal_band(grid, scene.pose, cam);
  const Band whole = whole_band(out.frontal);
  const TexelGeometry geo = texel_geometry(grid, whole, scene.pose, cam, rows, cols);
  out.normals = geo.normal;
  out.views = geo.view;

  // Texels facing away are only visible through the opening, from inside.
  VectorMap shading_normals = geo.normal;
  out.albedo = scene.material.albedo;
  for (std::size_t i = 0; i < shading_normals.size(); ++i) {
    if (geo.normal[i].dot(geo.view[i]) < 0.0) {
      shading_normals[i] = -geo.normal[i];
      out.albedo[i] *= kInnerWallDimming;
    }
  }
  out.diffuse = diffuse_factor(scene.env, shading_normals);
  out.specular = specular_factor(scene.env, shading_normals, geo.view, scene.material.shininess);
  out.texture = compose_texture(out.albedo, out.diffuse, out.specular, scene.material.specular_albedo);

  TextureRender tr = rasterize_texture(grid, whole, scene.pose, cam, out.texture);
  out.image = std::move(tr.image);
  out.coverage = std::move(tr.coverage);
  out.silhouette = rasterize_silhouette(grid, scene.pose, cam);
  return out;
}

GroundTruth ground_truth(const Scene& scene, const SceneRender& render, const SynthConfig& config) {
  const int first = config.tex_cols;
  const int n = config.tex_cols;
  GroundTruth gt;
  gt.image = render.image;
  gt.silhouette = render.silhouette;
  gt.albedo = crop_columns(scene.material.albedo, first, n);
  gt.diffuse = crop_columns(render.diffuse, first, n);
  gt.specular = crop_columns(render.specular, first, n);
  gt.normals = crop_columns(render.normals, first, n);
  gt.env_radiance = sg_environment(scene.lobes, config.env_rows, config.env_cols);
  return gt;
}

Scene sample_scene(std::uint64_t seed, const SynthConfig& config) {
  Rng rng(seed);
  Scene s;
  s.seed = seed;
  s.profile = sample_sor_curve(rng, config.profile_rows);
  s.pose = sample_pose(rng);
  s.material = sample_material(rng, config.tex_rows, 3 * config.tex_cols);
  if (config.diffuse_only) s.material.specular_albedo = 0.0;
  s.lobes = sample_sg_lobes(rng);
  s.env = radiance_to_intensity(sg_environment(s.lobes, config.env_rows, config.env_cols));
  // Maps are stored as 32-bit floats; rounding here makes the stored scene exact.
  for (Color& c : s.material.albedo) c = c.cast<float>().cast<double>();
  for (double& v : s.env) v = static_cast<float>(v);
  return s;
}

GeneratedScene generate_scene(std::uint64_t seed, const SynthConfig& config) {
  GeneratedScene g;
  g.scene = sample_scene(seed, config);
  const SceneRender render = render_scene(g.scene, config);
  g.truth = ground_truth(g.scene, render, config);
  return g;
}

}  // namespace lathe
