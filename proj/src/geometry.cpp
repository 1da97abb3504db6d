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

#include "lathe/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Geometry>

namespace lathe {

namespace {

constexpr double kPi = std::numbers::pi;

double deg2rad(double d) { return d * kPi / 180.0; }

Vec3 radial(double phi) { return {-std::sin(phi), 0.0, std::cos(phi)}; }

}  // namespace

double Camera::distance() const {
  return 0.5 / kFill / std::tan(deg2rad(fov_deg) / 2.0);
}

double Camera::focal_px() const {
  return 0.5 * height / std::tan(deg2rad(fov_deg) / 2.0);
}

Vec3 Camera::project(const Vec3& p) const {
  const double depth = p.z() + distance();
  const double f = focal_px();
  return {0.5 * width + f * p.x() / depth, 0.5 * height - f * p.y() / depth, depth};
}

Mat3 pose_rotation(const CameraPose& pose) {
  const Eigen::AngleAxisd pitch(-deg2rad(pose.pitch), Vec3::UnitX());
  const Eigen::AngleAxisd roll(deg2rad(pose.roll), Vec3::UnitZ());
  return (roll * pitch).toRotationMatrix();
}

Vec3 pose_translation(const CameraPose& pose) { return {pose.tx, pose.ty, 0.0}; }

VertexGrid revolve(const RadiusProfile& profile, int K) {
  const int L = profile.rows();
  if (K < 3) throw std::invalid_argument("revolve: K must be at least 3");
  if (L < 2) throw std::invalid_argument("revolve: profile needs at least 2 radii");
  if (!(profile.height > 0.0) || !std::isfinite(profile.height))
    throw std::invalid_argument("revolve: height must be positive and finite");
  for (int l = 0; l < L; ++l) {
    const double r = profile.radii[l];
    if (!std::isfinite(r) || r < 0.0)
      throw std::invalid_argument("revolve: radius " + std::to_string(l) + " is negative or non-finite");
  }

  VertexGrid grid(L, K);
  const double h = profile.height;
  for (int l = 0; l < L; ++l) {
    const double y = -0.5 * h + h * l / (L - 1);
    for (int k = 0; k < K; ++k) {
      const double phi = 2.0 * kPi * k / K;
      Vec3 p = profile.radii[l] * radial(phi);
      p.y() = y;
      grid(l, k) = p;
    }
  }
  return grid;
}

VectorMap surface_normals(const VertexGrid& grid) {
  const int L = grid.rows();
  const int K = grid.cols();
  VectorMap normals(L, K);
  constexpr double kTiny = 1e-12;

  auto quad_normal = [&](int l, int k) -> Vec3 {
    const int k1 = (k + 1) % K;
    const Vec3 d_up = grid(l + 1, k) - grid(l, k1);
    const Vec3 d_diag = grid(l + 1, k1) - grid(l, k);
    return d_up.cross(d_diag);
  };

  for (int l = 0; l < L; ++l) {
    // Radius of this ring: all columns share it.
    const Vec3& p0 = grid(l, 0);
    const double ring = std::hypot(p0.x(), p0.z());
    for (int k = 0; k < K; ++k) {
      if (ring < kTiny && (l == 0 || l == L - 1)) {
        normals(l, k) = Vec3(0.0, l == 0 ? -1.0 : 1.0, 0.0);
        continue;
      }
      Vec3 sum = Vec3::Zero();
      const int km = (k + K - 1) % K;
      for (int ql : {l - 1, l}) {
        if (ql < 0 || ql > L - 2) continue;
        sum += quad_normal(ql, km);
        sum += quad_normal(ql, k);
      }
      const double n = sum.norm();
      if (n > kTiny) {
        normals(l, k) = sum / n;
      } else {
        const Vec3& p = grid(l, k);
        Vec3 r(p.x(), 0.0, p.z());
        normals(l, k) = r.norm() > kTiny ? Vec3(r.normalized()) : radial(2.0 * kPi * k / K);
      }
    }
  }
  return normals;
}

VertexGrid to_camera(const VertexGrid& grid, const CameraPose& pose) {
  const Mat3 R = pose_rotation(pose);
  const Vec3 t = pose_translation(pose);
  VertexGrid out(grid.rows(), grid.cols());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = R * grid[i] + t;
  return out;
}

VertexGrid from_camera(const VertexGrid& grid, const CameraPose& pose) {
  const Mat3 Rt = pose_rotation(pose).transpose();
  const Vec3 t = pose_translation(pose);
  VertexGrid out(grid.rows(), grid.cols());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = Rt * (grid[i] - t);
  return out;
}

VectorMap rotate_directions(const VectorMap& dirs, const CameraPose& pose) {
  const Mat3 R = pose_rotation(pose);
  VectorMap out(dirs.rows(), dirs.cols());
  for (std::size_t i = 0; i < dirs.size(); ++i) out[i] = R * dirs[i];
  return out;
}

Vec3 view_direction(const Vec3& p, const Camera& camera) {
  const Vec3 d = camera.center() - p;
  const double n = d.norm();
  if (!(n > 1e-12)) throw std::invalid_argument("view_direction: point coincides with camera centre");
  return d / n;
}

VectorMap view_directions(const VertexGrid& camera_grid, const Camera& camera) {
  VectorMap out(camera_grid.rows(), camera_grid.cols());
  for (std::size_t i = 0; i < camera_grid.size(); ++i) out[i] = view_direction(camera_grid[i], camera);
  return out;
}

std::vector<std::uint8_t> Band::face_mask() const {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(grid_columns), 0);
  for (int j = 0; j < columns; ++j) mask[static_cast<std::size_t>(vertex_column(j))] = 1;
  return mask;
}

Band frontal_band(const VertexGrid& object_grid, const CameraPose& pose, const Camera& camera,
                  double fraction) {
  const int K = object_grid.cols();
  if (K < 3) throw std::invalid_argument("frontal_band: grid needs at least 3 columns");
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("frontal_band: fraction must be in (0, 1]");

  const VertexGrid cam = to_camera(object_grid, pose);
  Vec3 mean_view = Vec3::Zero();
  for (const Vec3& p : cam) mean_view += view_direction(p, camera);
  mean_view.normalize();

  const Mat3 R = pose_rotation(pose);
  int facing = 0;
  double best = -2.0;
  for (int k = 0; k < K; ++k) {
    const double score = (R * radial(2.0 * kPi * k / K)).dot(mean_view);
    if (score > best + 1e-12) {
      best = score;
      facing = k;
    }
  }

  Band band;
  band.grid_columns = K;
  band.columns = std::clamp(static_cast<int>(std::lround(K * fraction)), 1, K);
  band.first_column = ((facing - band.columns / 2) % K + K) % K;
  return band;
}

Band whole_band(const Band& frontal) {
  Band band;
  band.grid_columns = frontal.grid_columns;
  band.columns = frontal.grid_columns;
  band.first_column = ((frontal.first_column - frontal.columns) % band.grid_columns + band.grid_columns) %
                      band.grid_columns;
  return band;
}

namespace {

// Continuous (row, column) grid coordinates of texture coordinate (s, t).
void grid_coords(int L, int C, double s, double t, int& l, int& k, double& a, double& b) {
  const double u = std::clamp(1.0 - s, 0.0, 1.0) * (L - 1);
  const double v = std::clamp(t, 0.0, 1.0) * C;
  l = std::min(static_cast<int>(u), L - 2);
  k = std::min(static_cast<int>(v), C - 1);
  a = u - l;
  b = v - k;
}

}  // namespace

Vec3 band_surface_point(const VertexGrid& g, double s, double t) {
  int l, k;
  double a, b;
  grid_coords(g.rows(), g.cols() - 1, s, t, l, k, a, b);
  const Vec3& v00 = g(l, k);
  const Vec3& v01 = g(l, k + 1);
  const Vec3& v10 = g(l + 1, k);
  const Vec3& v11 = g(l + 1, k + 1);
  if (b >= a) return v00 + b * (v01 - v00) + a * (v11 - v01);
  return v00 + a * (v10 - v00) + b * (v11 - v10);
}

Vec3 band_normal(const VectorMap& n, double s, double t) {
  int l, k;
  double a, b;
  grid_coords(n.rows(), n.cols() - 1, s, t, l, k, a, b);
  const Vec3 v = (1 - a) * ((1 - b) * n(l, k) + b * n(l, k + 1)) +
                 a * ((1 - b) * n(l + 1, k) + b * n(l + 1, k + 1));
  const double len = v.norm();
  return len > 1e-12 ? Vec3(v / len) : n(l, k);
}

TexelGeometry texel_geometry(const VertexGrid& band_grid, const VectorMap& band_normals,
                             const Camera& camera, int rows, int cols) {
  if (!band_grid.same_shape(band_normals))
    throw std::invalid_argument("texel_geometry: vertex and normal grids differ in shape");
  TexelGeometry g{VectorMap(rows, cols), VectorMap(rows, cols), VectorMap(rows, cols)};
  for (int a = 0; a < rows; ++a) {
    const double s = (a + 0.5) / rows;
    for (int b = 0; b < cols; ++b) {
      const double t = (b + 0.5) / cols;
      g.position(a, b) = band_surface_point(band_grid, s, t);
      g.normal(a, b) = band_normal(band_normals, s, t);
      g.view(a, b) = view_direction(g.position(a, b), camera);
    }
  }
  return g;
}

TexelGeometry texel_geometry(const VertexGrid& object_grid, const Band& band, const CameraPose& pose,
                             const Camera& camera, int rows, int cols) {
  const VertexGrid g = band_columns(to_camera(object_grid, pose), band);
  const VectorMap n = band_columns(rotate_directions(surface_normals(object_grid), pose), band);
  return texel_geometry(g, n, camera, rows, cols);
}

}  // namespace lathe
