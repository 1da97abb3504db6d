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

#pragma once

#include <array>
#include <vector>

#include "lathe/geometry.hpp"
#include "lathe/grid.hpp"

namespace lathe {

/// Soft silhouette in [0, 1].
using SilhouetteImage = ScalarMap;

/// Texture laid out over a band: row 0 at the object's top, column 0 at the
/// band's first vertex column. Invalid texels hold zero.
struct UnwrappedTexture {
  ColorMap values;
  Mask valid;
};

struct TextureRender {
  ColorMap image;
  Mask coverage;
};

struct DistanceField {
  ScalarMap distance;
  /// Set when the mask had no foreground; every distance is then the image
  /// diagonal.
  bool empty_foreground = false;
};

/// Silhouette of the lateral surface plus a bottom cap.
///
/// A pixel whose centre lies inside a projected triangle is 1. Outside, the
/// value is max(0, 1 - d) where d is the distance in pixels from the centre to
/// the nearest triangle, so the image is continuous in the vertex positions
/// and exactly 0 beyond one pixel from the shape.
/// Throws std::invalid_argument if the object is entirely behind the camera.
SilhouetteImage rasterize_silhouette(const VertexGrid& object_grid, const CameraPose& pose, const Camera& camera);

using ScreenTriangle = std::array<Vec2, 3>;

/// Projected silhouette triangles in pixel coordinates. Strip l < L-1 holds
/// the faces between vertex rows l and l+1; strip L-1 holds the bottom cap.
/// Triangles with a vertex behind the camera are dropped.
struct SilhouetteMesh {
  std::vector<std::vector<ScreenTriangle>> strips;
  bool any_in_front = false;
};

SilhouetteMesh silhouette_mesh(const VertexGrid& object_grid, const CameraPose& pose, const Camera& camera);

/// Max-composites the soft coverage of one triangle into `out`.
void splat_soft_triangle(const ScreenTriangle& triangle, ScalarMap& out);

/// Inclusive pixel bounds of the pixels splat_soft_triangle may write.
struct PixelBounds {
  int c0 = 0, c1 = -1, r0 = 0, r1 = -1;
  bool empty() const { return c0 > c1 || r0 > r1; }
};
PixelBounds soft_triangle_bounds(const ScreenTriangle& triangle, int width, int height);

/// Z-buffered render of `texture` mapped onto the band, with perspective-correct
/// texture coordinates and bilinear texture lookup. Texture columns wrap when
/// the band is the full circle and clamp otherwise. Uncovered pixels are 0.
TextureRender rasterize_texture(const VertexGrid& object_grid, const Band& band, const CameraPose& pose,
                                const Camera& camera, const ColorMap& texture);

/// Texels are visible when normal . view > this.
inline constexpr double kGrazingThreshold = 0.1;

/// Inverse of rasterize_texture: projects every texel's surface point into
/// `image` and samples it bilinearly. Texels that face away (normal . view at
/// or below kGrazingThreshold) or project outside the frame are invalid.
UnwrappedTexture unwrap(const VertexGrid& object_grid, const Band& band, const CameraPose& pose,
                        const Camera& camera, const ColorMap& image, int tex_rows, int tex_cols);

/// Exact Euclidean distance from each pixel centre to the nearest non-zero
/// pixel of `foreground` (0 on the foreground).
DistanceField distance_transform(const Mask& foreground);

/// Bilinear lookup at continuous texel coordinates (x right, y down, texel
/// centres at integer + 0.5). Rows clamp; columns wrap if `wrap_columns`.
Color sample_bilinear(const ColorMap& map, double x, double y, bool wrap_columns = false);

/// 1 where value >= threshold.
Mask threshold(const ScalarMap& values, double threshold);

}  // namespace lathe
