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

#include "lathe/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lathe {

namespace {

constexpr double kNearDepth = 1e-6;

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double segment_distance_sq(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).squaredNorm();
}

struct PixelRange {
  int c0, c1, r0, r1;  // inclusive
  bool empty() const { return c0 > c1 || r0 > r1; }
};

// Pixels whose centres lie within [min - pad, max + pad].
PixelRange pixel_range(const std::array<Vec2, 3>& v, double pad, int width, int height) {
  double xmin = std::min({v[0].x(), v[1].x(), v[2].x()}) - pad;
  double xmax = std::max({v[0].x(), v[1].x(), v[2].x()}) + pad;
  double ymin = std::min({v[0].y(), v[1].y(), v[2].y()}) - pad;
  double ymax = std::max({v[0].y(), v[1].y(), v[2].y()}) + pad;
  PixelRange r;
  r.c0 = std::max(0, static_cast<int>(std::ceil(xmin - 0.5)));
  r.c1 = std::min(width - 1, static_cast<int>(std::floor(xmax - 0.5)));
  r.r0 = std::max(0, static_cast<int>(std::ceil(ymin - 0.5)));
  r.r1 = std::min(height - 1, static_cast<int>(std::floor(ymax - 0.5)));
  return r;
}

// Screen-space barycentrics of p; false if p is outside or the triangle is
// degenerate. Edges count as inside.
bool barycentric(const std::array<Vec2, 3>& v, const Vec2& p, double area, std::array<double, 3>& w) {
  if (area == 0.0) return false;
  w[0] = cross2(v[2] - v[1], p - v[1]) / area;
  w[1] = cross2(v[0] - v[2], p - v[2]) / area;
  w[2] = 1.0 - w[0] - w[1];
  return w[0] >= 0.0 && w[1] >= 0.0 && w[2] >= 0.0;
}

}  // namespace

PixelBounds soft_triangle_bounds(const ScreenTriangle& v, int width, int height) {
  const PixelRange r = pixel_range(v, 1.0, width, height);
  return {r.c0, r.c1, r.r0, r.r1};
}

void splat_soft_triangle(const ScreenTriangle& v, ScalarMap& out) {
  const PixelRange pr = pixel_range(v, 1.0, out.cols(), out.rows());
  if (pr.empty()) return;
  const double area = cross2(v[1] - v[0], v[2] - v[0]);
  std::array<double, 3> w;
  for (int r = pr.r0; r <= pr.r1; ++r) {
    for (int c = pr.c0; c <= pr.c1; ++c) {
      double& o = out(r, c);
      if (o >= 1.0) continue;
      const Vec2 p(c + 0.5, r + 0.5);
      if (barycentric(v, p, area, w)) {
        o = 1.0;
        continue;
      }
      const double d2 = std::min({segment_distance_sq(p, v[0], v[1]), segment_distance_sq(p, v[1], v[2]),
                                  segment_distance_sq(p, v[2], v[0])});
      if (d2 < 1.0) o = std::max(o, 1.0 - std::sqrt(d2));
    }
  }
}

SilhouetteMesh silhouette_mesh(const VertexGrid& object_grid, const CameraPose& pose, const Camera& camera) {
  const int L = object_grid.rows();
  const int K = object_grid.cols();
  const VertexGrid cam = to_camera(object_grid, pose);

  SilhouetteMesh mesh;
  Grid<Vec3> proj(L, K);
  for (std::size_t i = 0; i < cam.size(); ++i) {
    proj[i] = camera.project(cam[i]);
    mesh.any_in_front = mesh.any_in_front || proj[i].z() > kNearDepth;
  }
  Vec3 base = Vec3::Zero();
  for (int k = 0; k < K; ++k) base += cam(0, k);
  const Vec3 base_proj = camera.project(base / K);

  mesh.strips.resize(static_cast<std::size_t>(L));
  auto tri = [&](std::vector<ScreenTriangle>& strip, const Vec3& a, const Vec3& b, const Vec3& c) {
    if (a.z() <= kNearDepth || b.z() <= kNearDepth || c.z() <= kNearDepth) return;
    strip.push_back({a.head<2>(), b.head<2>(), c.head<2>()});
  };
  for (int l = 0; l + 1 < L; ++l) {
    auto& strip = mesh.strips[static_cast<std::size_t>(l)];
    strip.reserve(2 * static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      const int k1 = (k + 1) % K;
      tri(strip, proj(l, k), proj(l, k1), proj(l + 1, k1));
      tri(strip, proj(l, k), proj(l + 1, k1), proj(l + 1, k));
    }
  }
  auto& cap = mesh.strips.back();
  for (int k = 0; k < K; ++k) tri(cap, base_proj, proj(0, k), proj(0, (k + 1) % K));
  return mesh;
}

SilhouetteImage rasterize_silhouette(const VertexGrid& object_grid, const CameraPose& pose, const Camera& camera) {
  const SilhouetteMesh mesh = silhouette_mesh(object_grid, pose, camera);
  if (!mesh.any_in_front) throw std::invalid_argument("rasterize_silhouette: object is behind the camera");
  SilhouetteImage out(camera.height, camera.width, 0.0);
  for (const auto& strip : mesh.strips)
    for (const auto& t : strip) splat_soft_triangle(t, out);
  return out;
}

Color sample_bilinear(const ColorMap& map, double x, double y, bool wrap_columns) {
  const int R = map.rows();
  const int C = map.cols();
  const double fx = x - 0.5;
  const double fy = y - 0.5;
  const double x0f = std::floor(fx);
  const double y0f = std::floor(fy);
  const double wx = fx - x0f;
  const double wy = fy - y0f;
  const int y0 = std::clamp(static_cast<int>(y0f), 0, R - 1);
  const int y1 = std::clamp(static_cast<int>(y0f) + 1, 0, R - 1);
  int x0 = static_cast<int>(x0f);
  int x1 = x0 + 1;
  if (wrap_columns) {
    x0 = ((x0 % C) + C) % C;
    x1 = ((x1 % C) + C) % C;
  } else {
    x0 = std::clamp(x0, 0, C - 1);
    x1 = std::clamp(x1, 0, C - 1);
  }
  return (1 - wy) * ((1 - wx) * map(y0, x0) + wx * map(y0, x1)) + wy * ((1 - wx) * map(y1, x0) + wx * map(y1, x1));
}

TextureRender rasterize_texture(const VertexGrid& object_grid, const Band& band, const CameraPose& pose,
                                const Camera& camera, const ColorMap& texture) {
  if (texture.empty()) throw std::invalid_argument("rasterize_texture: empty texture");
  const VertexGrid g = band_columns(to_camera(object_grid, pose), band);
  const int L = g.rows();
  const int C = g.cols() - 1;

  Grid<Vec3> proj(L, C + 1);
  for (std::size_t i = 0; i < g.size(); ++i) proj[i] = camera.project(g[i]);

  const int H = camera.height;
  const int W = camera.width;
  ScalarMap depth(H, W, std::numeric_limits<double>::infinity());
  Grid<Vec2> uv(H, W, Vec2::Zero());

  auto tri = [&](int la, int ja, int lb, int jb, int lc, int jc) {
    const std::array<Vec3, 3> P{proj(la, ja), proj(lb, jb), proj(lc, jc)};
    if (P[0].z() <= kNearDepth || P[1].z() <= kNearDepth || P[2].z() <= kNearDepth) return;
    const std::array<Vec2, 3> v{P[0].head<2>(), P[1].head<2>(), P[2].head<2>()};
    const std::array<Vec2, 3> st{Vec2(1.0 - double(la) / (L - 1), double(ja) / C),
                                 Vec2(1.0 - double(lb) / (L - 1), double(jb) / C),
                                 Vec2(1.0 - double(lc) / (L - 1), double(jc) / C)};
    const PixelRange pr = pixel_range(v, 0.0, W, H);
    if (pr.empty()) return;
    const double area = cross2(v[1] - v[0], v[2] - v[0]);
    std::array<double, 3> w;
    for (int r = pr.r0; r <= pr.r1; ++r) {
      for (int c = pr.c0; c <= pr.c1; ++c) {
        if (!barycentric(v, Vec2(c + 0.5, r + 0.5), area, w)) continue;
        const double q0 = w[0] / P[0].z(), q1 = w[1] / P[1].z(), q2 = w[2] / P[2].z();
        const double q = q0 + q1 + q2;
        const double z = 1.0 / q;
        if (z >= depth(r, c)) continue;
        depth(r, c) = z;
        uv(r, c) = (q0 * st[0] + q1 * st[1] + q2 * st[2]) / q;
      }
    }
  };
  for (int l = 0; l + 1 < L; ++l) {
    for (int j = 0; j < C; ++j) {
      tri(l, j, l, j + 1, l + 1, j + 1);
      tri(l, j, l + 1, j + 1, l + 1, j);
    }
  }

  TextureRender out{ColorMap(H, W, Color::Zero()), Mask(H, W, 0)};
  const bool wrap = band.full();
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      if (!std::isfinite(depth(r, c))) continue;
      const Vec2& p = uv(r, c);
      out.image(r, c) = sample_bilinear(texture, p.y() * texture.cols(), p.x() * texture.rows(), wrap);
      out.coverage(r, c) = 1;
    }
  }
  return out;
}

UnwrappedTexture unwrap(const VertexGrid& object_grid, const Band& band, const CameraPose& pose,
                        const Camera& camera, const ColorMap& image, int tex_rows, int tex_cols) {
  if (image.rows() != camera.height || image.cols() != camera.width)
    throw std::invalid_argument("unwrap: image size does not match camera");
  const TexelGeometry geo = texel_geometry(object_grid, band, pose, camera, tex_rows, tex_cols);

  UnwrappedTexture out{ColorMap(tex_rows, tex_cols, Color::Zero()), Mask(tex_rows, tex_cols, 0)};
  for (std::size_t i = 0; i < geo.position.size(); ++i) {
    if (geo.normal[i].dot(geo.view[i]) <= kGrazingThreshold) continue;
    const Vec3 p = camera.project(geo.position[i]);
    if (p.z() <= kNearDepth) continue;
    if (p.x() < 0.5 || p.x() > camera.width - 0.5 || p.y() < 0.5 || p.y() > camera.height - 0.5) continue;
    out.values[i] = sample_bilinear(image, p.x(), p.y());
    out.valid[i] = 1;
  }
  return out;
}

namespace {

// Felzenszwalb-Huttenlocher lower envelope of parabolas, in place on f.
void edt_1d(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    auto intersect = [&](int p) {
      return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
    };
    double s = intersect(v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
  f.swap(d);
}

}  // namespace

DistanceField distance_transform(const Mask& fg) {
  const int H = fg.rows();
  const int W = fg.cols();
  DistanceField out{ScalarMap(H, W, 0.0), false};
  const bool any = std::any_of(fg.begin(), fg.end(), [](std::uint8_t v) { return v != 0; });
  if (!any) {
    out.empty_foreground = true;
    const double diag = std::hypot(double(H), double(W));
    std::fill(out.distance.begin(), out.distance.end(), diag);
    return out;
  }
  // Large but finite, so parabola intersections stay well defined.
  const double kFar = 1e20;
  const int n = std::max(H, W);
  std::vector<double> f, d(n), z(n + 1);
  std::vector<int> v(n);

  ScalarMap sq(H, W);
  for (int c = 0; c < W; ++c) {
    f.assign(H, 0.0);
    d.resize(H);
    for (int r = 0; r < H; ++r) f[r] = fg(r, c) ? 0.0 : kFar;
    edt_1d(f, d, v, z);
    for (int r = 0; r < H; ++r) sq(r, c) = f[r];
  }
  for (int r = 0; r < H; ++r) {
    f.assign(W, 0.0);
    d.resize(W);
    for (int c = 0; c < W; ++c) f[c] = sq(r, c);
    edt_1d(f, d, v, z);
    for (int c = 0; c < W; ++c) out.distance(r, c) = std::sqrt(f[c]);
  }
  return out;
}

Mask threshold(const ScalarMap& values, double t) {
  Mask m(values.rows(), values.cols(), 0);
  for (std::size_t i = 0; i < values.size(); ++i) m[i] = values[i] >= t ? 1 : 0;
  return m;
}

}  // namespace lathe
