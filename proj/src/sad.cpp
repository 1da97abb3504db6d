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

#include "lathe/sad.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lathe {

namespace {

const Color kLuma(0.2126, 0.7152, 0.0722);
constexpr double kStdEpsilon = 1e-8;

void check_size(int size) {
  if (size < 4 || size % 4 != 0) throw std::invalid_argument("patch size must be a positive multiple of 4");
}

}  // namespace

std::vector<PatchSite> valid_patch_sites(const Mask& valid, const PatchConfig& cfg) {
  check_size(cfg.size);
  const int H = valid.rows(), W = valid.cols(), s = cfg.size;
  std::vector<PatchSite> sites;
  if (s > H || s > W) return sites;
  // Summed-area table.
  Grid<long long> sat(H + 1, W + 1, 0);
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c) sat(r + 1, c + 1) = valid(r, c) + sat(r, c + 1) + sat(r + 1, c) - sat(r, c);
  const double need = cfg.min_validity * s * s;
  for (int r = 0; r + s <= H; ++r) {
    for (int c = 0; c + s <= W; ++c) {
      const long long n = sat(r + s, c + s) - sat(r, c + s) - sat(r + s, c) + sat(r, c);
      if (double(n) >= need) sites.push_back({r, c});
    }
  }
  return sites;
}

std::vector<PatchSite> sample_patch_sites(std::span<const PatchSite> candidates, int count, Rng& rng) {
  std::vector<PatchSite> out;
  if (candidates.empty()) return out;
  for (int i = 0; i < count; ++i) out.push_back(candidates[static_cast<std::size_t>(rng.index(int(candidates.size())))]);
  return out;
}

double patch_variance(const ScalarMap& specular, const Mask& valid, const PatchSite& site, int size) {
  double sum = 0.0, sq = 0.0;
  int n = 0;
  for (int r = site.row; r < site.row + size; ++r) {
    for (int c = site.col; c < site.col + size; ++c) {
      if (!valid(r, c)) continue;
      sum += specular(r, c);
      sq += specular(r, c) * specular(r, c);
      ++n;
    }
  }
  if (n == 0) return 0.0;
  const double mean = sum / n;
  return std::max(0.0, sq / n - mean * mean);
}

PatchGroups sad_group_patches(const ScalarMap& specular, const Mask& valid, std::span<const PatchSite> sites,
                              const PatchConfig& cfg) {
  PatchGroups g;
  if (sites.size() < 4) {
    g.skipped = true;
    return g;
  }
  std::vector<double> var(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) var[i] = patch_variance(specular, valid, sites[i], cfg.size);
  std::vector<std::size_t> order(sites.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return var[a] < var[b]; });
  const std::size_t k = static_cast<std::size_t>(std::floor(double(sites.size()) * cfg.group_fraction));
  if (k == 0) {
    g.skipped = true;
    return g;
  }
  for (std::size_t i = 0; i < k; ++i) {
    g.nonspecular.push_back(sites[order[i]]);
    g.specular.push_back(sites[order[sites.size() - k + i]]);
  }
  return g;
}

PatchFeature patch_features(const ColorMap& map, const PatchSite& site, int size) {
  check_size(size);
  const int cell = size / 4;
  const double n = double(size) * size;
  PatchFeature f = PatchFeature::Zero();
  Color sum = Color::Zero(), sq = Color::Zero();
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const Color& x = map(site.row + r, site.col + c);
      sum += x;
      sq += x.cwiseProduct(x);
      f[6 + (r / cell) * 4 + c / cell] += kLuma.dot(x);
    }
  }
  const Color mean = sum / n;
  const Color var = (sq / n - mean.cwiseProduct(mean)).cwiseMax(0.0);
  f.segment<3>(0) = mean;
  f.segment<3>(3) = (var.array() + kStdEpsilon).sqrt().matrix();
  f.segment<16>(6) /= double(cell) * cell;
  return f;
}

void patch_features_backward(const ColorMap& map, const PatchSite& site, int size, const PatchFeature& g,
                             ColorMap& grad) {
  const int cell = size / 4;
  const double n = double(size) * size;
  Color sum = Color::Zero(), sq = Color::Zero();
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) {
      const Color& x = map(site.row + r, site.col + c);
      sum += x;
      sq += x.cwiseProduct(x);
    }
  const Color mean = sum / n;
  const Color var = (sq / n - mean.cwiseProduct(mean)).cwiseMax(0.0);
  const Color sd = (var.array() + kStdEpsilon).sqrt().matrix();
  const Color g_mean = g.segment<3>(0);
  const Color g_sd = g.segment<3>(3);
  const double cell_n = double(cell) * cell;
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const Color& x = map(site.row + r, site.col + c);
      Color d = g_mean / n;
      // d sd / d x = (x - mean) / (n sd)
      d += g_sd.cwiseProduct(x - mean).cwiseQuotient(sd) / n;
      d += kLuma * (g[6 + (r / cell) * 4 + c / cell] / cell_n);
      grad(site.row + r, site.col + c) += d;
    }
  }
}

double median_bandwidth(std::span<const PatchFeature> x, std::span<const PatchFeature> y) {
  std::vector<const PatchFeature*> all;
  for (const auto& v : x) all.push_back(&v);
  for (const auto& v : y) all.push_back(&v);
  std::vector<double> d;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) d.push_back((*all[i] - *all[j]).squaredNorm());
  if (d.empty()) return 1.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid > 0.0 ? *mid : 1.0;
}

MmdResult loss_sad_surrogate(std::span<const PatchFeature> x, std::span<const PatchFeature> y, double bandwidth,
                             std::vector<PatchFeature>* grad_x, std::vector<PatchFeature>* grad_y) {
  if (x.empty() || y.empty()) throw std::invalid_argument("loss_sad_surrogate: empty group");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("loss_sad_surrogate: bandwidth must be positive");
  const double m = double(x.size()), n = double(y.size());
  if (grad_x) grad_x->assign(x.size(), PatchFeature::Zero());
  if (grad_y) grad_y->assign(y.size(), PatchFeature::Zero());

  // Each pair term w * k(a, b) contributes w * k * (-2 (a - b) / h) to a.
  auto block = [&](std::span<const PatchFeature> a, std::span<const PatchFeature> b, double w,
                   std::vector<PatchFeature>* ga, std::vector<PatchFeature>* gb) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        const PatchFeature diff = a[i] - b[j];
        const double k = std::exp(-diff.squaredNorm() / bandwidth);
        s += w * k;
        const PatchFeature g = (-2.0 * w * k / bandwidth) * diff;
        if (ga) (*ga)[i] += g;
        if (gb) (*gb)[j] -= g;
      }
    }
    return s;
  };
  MmdResult r;
  r.value = block(x, x, 1.0 / (m * m), grad_x, grad_x) + block(y, y, 1.0 / (n * n), grad_y, grad_y) +
            block(x, y, -2.0 / (m * n), grad_x, grad_y);
  // Rounding can leave a tiny negative value for identical groups.
  r.value = std::max(r.value, 0.0);
  r.single_sample = x.size() == 1 || y.size() == 1;
  return r;
}

}  // namespace lathe
