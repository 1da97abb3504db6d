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

// Solid-of-revolution geometry.
//
// Frames. The object frame has the axis of revolution along +Y with the
// object centred on the origin: row l of a vertex grid sits at height
// y = -h/2 + h * l / (L - 1), so row 0 is the base. Column k lies at angle
// phi_k = 2*pi*k/K and vertex (l, k) is (-r_l sin phi_k, y_l, r_l cos phi_k);
// the column at phi = pi faces a camera on the -Z axis.
//
// The world ("camera space") frame is the object frame after the pose:
// p' = Rz(roll) * Rx(-pitch) * p + (tx, ty, 0). Positive pitch tilts the top
// towards the camera, i.e. the camera looks down on the object. The camera
// sits at (0, 0, -D) looking along +Z with +Y up.

#pragma once

#include <cstdint>
#include <vector>

#include "lathe/grid.hpp"

namespace lathe {

/// Discretised generatrix: radii at L evenly spaced heights plus axis height.
struct RadiusProfile {
  std::vector<double> radii;
  double height = 1.0;

  int rows() const { return static_cast<int>(radii.size()); }
  bool operator==(const RadiusProfile&) const = default;
};

/// L x K surface samples; rows follow height, columns follow rotation angle.
using VertexGrid = Grid<Vec3>;

struct CameraPose {
  double pitch = 0.0;  ///< degrees
  double roll = 0.0;   ///< degrees
  double tx = 0.0;     ///< object units
  double ty = 0.0;     ///< object units

  bool operator==(const CameraPose&) const = default;
};

/// Fixed-intrinsics pinhole camera on the -Z axis.
struct Camera {
  double fov_deg = 10.0;  ///< vertical field of view
  int width = 256;
  int height = 256;

  /// Fraction of the frame height a unit-height object spans at the origin.
  static constexpr double kFill = 0.5;

  double distance() const;
  double focal_px() const;
  Vec3 center() const { return {0.0, 0.0, -distance()}; }

  /// Pixel coordinates (x right, y down; pixel (r, c) has its centre at
  /// (c + 0.5, r + 0.5)) in the first two components, depth along +Z from
  /// the camera in the third.
  Vec3 project(const Vec3& world) const;

  bool operator==(const Camera&) const = default;
};

Mat3 pose_rotation(const CameraPose& pose);
Vec3 pose_translation(const CameraPose& pose);

/// Revolves the profile into a vertex grid with K columns.
/// Throws std::invalid_argument on K < 3, L < 2, non-positive height, or
/// negative / non-finite radii.
VertexGrid revolve(const RadiusProfile& profile, int K);

/// Outward unit normals at every vertex of a closed (full revolution) grid.
/// Area-weighted average of the adjacent quad normals; zero-radius rows at the
/// ends use the axial direction and other degenerate neighbourhoods fall back
/// to the radial direction.
VectorMap surface_normals(const VertexGrid& grid);

VertexGrid to_camera(const VertexGrid& grid, const CameraPose& pose);
VertexGrid from_camera(const VertexGrid& grid, const CameraPose& pose);
/// Rotates direction vectors (normals) by the pose rotation.
VectorMap rotate_directions(const VectorMap& dirs, const CameraPose& pose);

/// Unit vectors from each camera-space point towards the camera centre.
/// Throws std::invalid_argument if a point coincides with the camera centre.
VectorMap view_directions(const VertexGrid& camera_grid, const Camera& camera);
Vec3 view_direction(const Vec3& camera_point, const Camera& camera);

/// A contiguous, possibly wrapping, run of face columns of a K-column grid.
/// Face j of the band lies between vertex columns first + j and first + j + 1
/// (mod K). A full band (columns == K) revisits its first vertex column at the
/// end, so its sub-grid has K + 1 columns.
struct Band {
  int first_column = 0;
  int columns = 0;
  int grid_columns = 0;

  bool full() const { return columns == grid_columns; }
  int vertex_column(int j) const { return (first_column + j) % grid_columns; }
  /// K flags, one per face column of the grid.
  std::vector<std::uint8_t> face_mask() const;

  bool operator==(const Band&) const = default;
};

/// The frontal band: `fraction` of the full circle (K/3 faces by default),
/// centred on the vertex column whose outward radial direction is closest to
/// the mean view direction.
Band frontal_band(const VertexGrid& object_grid, const CameraPose& pose, const Camera& camera,
                  double fraction = 1.0 / 3.0);

/// The full circle laid out so that `frontal` occupies its middle third.
Band whole_band(const Band& frontal);

/// Extracts the band's vertex columns (columns + 1 of them) from `grid`.
template <class T>
Grid<T> band_columns(const Grid<T>& grid, const Band& band) {
  Grid<T> out(grid.rows(), band.columns + 1);
  for (int r = 0; r < grid.rows(); ++r)
    for (int j = 0; j <= band.columns; ++j) out(r, j) = grid(r, band.vertex_column(j));
  return out;
}

/// Texture-space parameterisation of a band sub-grid.
///
/// Texture coordinate s runs from 0 at the top row of the object to 1 at its
/// base; t runs from 0 at the band's first vertex column to 1 at its last.
/// Each quad is split along its (l, k)-(l+1, k+1) diagonal; points inside a
/// quad are affine in (s, t) on their triangle, which is also what the
/// rasteriser's perspective-correct interpolation produces.
Vec3 band_surface_point(const VertexGrid& band_grid, double s, double t);
/// Bilinear interpolation of a band-aligned normal grid, renormalised.
Vec3 band_normal(const VectorMap& band_normals, double s, double t);

/// Per-texel surface samples of a band, in camera space.
struct TexelGeometry {
  VectorMap position;
  VectorMap normal;
  VectorMap view;
};

/// Samples the band at texel centres s = (a + 0.5)/rows, t = (b + 0.5)/cols.
TexelGeometry texel_geometry(const VertexGrid& camera_band_grid, const VectorMap& camera_band_normals,
                             const Camera& camera, int rows, int cols);

/// Texel geometry of `band` of an object-space grid placed by `pose`.
TexelGeometry texel_geometry(const VertexGrid& object_grid, const Band& band, const CameraPose& pose,
                             const Camera& camera, int rows, int cols);

}  // namespace lathe
