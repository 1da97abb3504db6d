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

#include "lathe/shading.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lathe {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kUnitTolerance = 1e-4;
// exp(-50) ~ 2e-22: specular powers below this are dropped by ShadingOperator.
constexpr double kLogPowerFloor = -50.0;

void require_unit(const VectorMap& v, const char* what) {
  for (const Vec3& x : v)
    if (!(std::abs(x.norm() - 1.0) <= kUnitTolerance))
      throw std::invalid_argument(std::string(what) + " must be unit vectors");
}

}  // namespace

double SphericalGaussianLobe::eval(const Vec3& dir) const {
  return std::sqrt(bandwidth) * intensity * std::exp(-bandwidth * (1.0 - dir.dot(axis)));
}

Vec3 light_direction(int row, int col, int rows, int cols) {
  const double theta = (row + 0.5) * kPi / rows;
  const double phi = (col + 0.5) * 2.0 * kPi / cols;
  return {std::sin(theta) * std::sin(phi), std::cos(theta), std::sin(theta) * std::cos(phi)};
}

Grid<Vec3> pixel_light_directions(int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("pixel_light_directions: empty map");
  Grid<Vec3> dirs(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) dirs(i, j) = light_direction(i, j, rows, cols);
  return dirs;
}

ScalarMap pixel_solid_angles(int rows, int cols) {
  ScalarMap w(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const double band = std::cos(i * kPi / rows) - std::cos((i + 1) * kPi / rows);
    for (int j = 0; j < cols; ++j) w(i, j) = band * 2.0 * kPi / cols;
  }
  return w;
}

Vec3 reflect(const Vec3& light, const Vec3& normal) {
  return 2.0 * light.dot(normal) * normal - light;
}

ScalarMap diffuse_factor(const EnvironmentMap& env, const VectorMap& normals) {
  require_unit(normals, "diffuse_factor: normals");
  const Grid<Vec3> dirs = pixel_light_directions(env.rows(), env.cols());
  ScalarMap out(normals.rows(), normals.cols(), 0.0);
  for (std::size_t j = 0; j < normals.size(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < env.size(); ++i) sum += env[i] * std::max(dirs[i].dot(normals[j]), 0.0);
    out[j] = sum;
  }
  return out;
}

ScalarMap specular_factor(const EnvironmentMap& env, const VectorMap& normals, const VectorMap& views,
                          double shininess) {
  if (!std::isfinite(shininess) || shininess < 1.0)
    throw std::invalid_argument("specular_factor: shininess must be finite and >= 1");
  if (!normals.same_shape(views)) throw std::invalid_argument("specular_factor: shape mismatch");
  require_unit(normals, "specular_factor: normals");
  require_unit(views, "specular_factor: view directions");
  const Grid<Vec3> dirs = pixel_light_directions(env.rows(), env.cols());
  const double norm = (shininess + 1.0) / (2.0 * kPi);
  ScalarMap out(normals.rows(), normals.cols(), 0.0);
  for (std::size_t j = 0; j < normals.size(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < env.size(); ++i) {
      const double c = reflect(dirs[i], normals[j]).dot(views[j]);
      if (c > 0.0) sum += env[i] * std::pow(c, shininess);
    }
    out[j] = norm * sum;
  }
  return out;
}

double tonemap(double x) {
  if (x < 0.0) throw std::domain_error("tonemap: negative input");
  return std::pow(x, 1.0 / kGamma);
}

double inverse_tonemap(double y) {
  if (y < 0.0) throw std::domain_error("inverse_tonemap: negative input");
  return std::pow(y, kGamma);
}

ColorMap compose_texture(const ColorMap& albedo, const ScalarMap& diffuse, const ScalarMap& specular,
                         double specular_albedo) {
  if (!albedo.same_shape(diffuse) || !albedo.same_shape(specular))
    throw std::invalid_argument("compose_texture: shape mismatch");
  ColorMap out(albedo.rows(), albedo.cols());
  for (std::size_t j = 0; j < albedo.size(); ++j) {
    for (int c = 0; c < 3; ++c) {
      const double x = albedo[j][c] * diffuse[j] + specular_albedo * specular[j];
      out[j][c] = std::clamp(tonemap(std::max(x, 0.0)), 0.0, 1.0);
    }
  }
  return out;
}

EnvironmentMap sg_environment(std::span<const SphericalGaussianLobe> lobes, int rows, int cols) {
  EnvironmentMap env(rows, cols, 0.0);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const Vec3 d = light_direction(i, j, rows, cols);
      double v = 0.0;
      for (const auto& lobe : lobes) v += lobe.eval(d);
      env(i, j) = std::clamp(v, 0.0, 1.0);
    }
  }
  return env;
}

EnvironmentMap radiance_to_intensity(const EnvironmentMap& radiance) {
  const ScalarMap w = pixel_solid_angles(radiance.rows(), radiance.cols());
  EnvironmentMap out(radiance.rows(), radiance.cols());
  for (std::size_t i = 0; i < radiance.size(); ++i) out[i] = radiance[i] * w[i];
  return out;
}

ShadingOperator::ShadingOperator(const VectorMap& normals, const VectorMap& views, int env_rows, int env_cols)
    : env_rows_(env_rows), env_cols_(env_cols) {
  if (!normals.same_shape(views)) throw std::invalid_argument("ShadingOperator: shape mismatch");
  require_unit(normals, "ShadingOperator: normals");
  require_unit(views, "ShadingOperator: view directions");
  const Grid<Vec3> dirs = pixel_light_directions(env_rows, env_cols);
  const std::size_t n = normals.size();

  diffuse_offsets_.reserve(n + 1);
  specular_offsets_.reserve(n + 1);
  diffuse_offsets_.push_back(0);
  specular_offsets_.push_back(0);
  diffuse_sums_.assign(n, 0.0);

  std::vector<Entry> spec;
  for (std::size_t j = 0; j < n; ++j) {
    spec.clear();
    const Vec3& N = normals[j];
    const Vec3& P = views[j];
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      const double ln = dirs[i].dot(N);
      if (ln > 0.0) {
        diffuse_.push_back({static_cast<std::uint32_t>(i), static_cast<float>(ln)});
        diffuse_sums_[j] += static_cast<float>(ln);
      }
      const double c = reflect(dirs[i], N).dot(P);
      if (c > 0.0) spec.push_back({static_cast<std::uint32_t>(i), static_cast<float>(std::log(c))});
    }
    std::stable_sort(spec.begin(), spec.end(), [](const Entry& a, const Entry& b) { return a.value > b.value; });
    specular_.insert(specular_.end(), spec.begin(), spec.end());
    diffuse_offsets_.push_back(diffuse_.size());
    specular_offsets_.push_back(specular_.size());
  }
  active_.assign(n, 0);
  powers_.assign(specular_.size(), 0.0);
}

void ShadingOperator::evaluate(std::span<const double> env, double shininess, std::span<double> diffuse,
                               std::span<double> specular) {
  if (env.size() != static_cast<std::size_t>(lights())) throw std::invalid_argument("ShadingOperator: env size");
  const std::size_t n = active_.size();
  if (diffuse.size() != n || specular.size() != n) throw std::invalid_argument("ShadingOperator: output size");
  const double norm = (shininess + 1.0) / (2.0 * kPi);
  for (std::size_t j = 0; j < n; ++j) {
    double d = 0.0;
    for (std::size_t e = diffuse_offsets_[j]; e < diffuse_offsets_[j + 1]; ++e)
      d += env[diffuse_[e].light] * static_cast<double>(diffuse_[e].value);
    diffuse[j] = d;

    double s = 0.0;
    std::size_t e = specular_offsets_[j];
    for (; e < specular_offsets_[j + 1]; ++e) {
      const double lp = shininess * static_cast<double>(specular_[e].value);
      if (lp < kLogPowerFloor) break;
      const double p = std::exp(lp);
      powers_[e] = p;
      s += env[specular_[e].light] * p;
    }
    active_[j] = e - specular_offsets_[j];
    specular[j] = norm * s;
  }
}

void ShadingOperator::accumulate_gradient(std::span<const double> env, double shininess,
                                          std::span<const double> grad_diffuse,
                                          std::span<const double> grad_specular, std::span<double> grad_env,
                                          double& grad_shininess) const {
  const std::size_t n = active_.size();
  const double norm = (shininess + 1.0) / (2.0 * kPi);
  const double dnorm = 1.0 / (2.0 * kPi);
  double g_alpha = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double gd = grad_diffuse[j];
    if (gd != 0.0)
      for (std::size_t e = diffuse_offsets_[j]; e < diffuse_offsets_[j + 1]; ++e)
        grad_env[diffuse_[e].light] += gd * static_cast<double>(diffuse_[e].value);

    const double gs = grad_specular[j];
    if (gs == 0.0) continue;
    double sum = 0.0;
    double sum_log = 0.0;
    const std::size_t begin = specular_offsets_[j];
    const std::size_t end = begin + active_[j];
    for (std::size_t e = begin; e < end; ++e) {
      const double p = powers_[e];
      const double w = env[specular_[e].light] * p;
      grad_env[specular_[e].light] += gs * norm * p;
      sum += w;
      sum_log += w * static_cast<double>(specular_[e].value);
    }
    g_alpha += gs * (dnorm * sum + norm * sum_log);
  }
  grad_shininess += g_alpha;
}

}  // namespace lathe
