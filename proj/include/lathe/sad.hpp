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

// Specularity-grouped albedo patch discrepancy.
//
// Albedo patches are split by the variance of the specular shading under
// them. If the albedo estimate has absorbed highlights, the two groups look
// different; the squared maximum mean discrepancy between their feature
// vectors measures how different.

#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "lathe/grid.hpp"
#include "lathe/rng.hpp"

namespace lathe {

struct PatchConfig {
  int size = 32;                ///< square patch side in texels; multiple of 4
  int count = 64;               ///< sites drawn per step
  double group_fraction = 0.25; ///< fraction of sites in each group
  double min_validity = 0.9;    ///< required fraction of valid texels

  bool operator==(const PatchConfig&) const = default;
};

struct PatchSite {
  int row = 0;  ///< top-left texel
  int col = 0;
  bool operator==(const PatchSite&) const = default;
};

/// Every top-left position whose patch is at least min_validity valid.
std::vector<PatchSite> valid_patch_sites(const Mask& valid, const PatchConfig& config);

/// `count` draws with replacement from `candidates` (one Rng::index each).
std::vector<PatchSite> sample_patch_sites(std::span<const PatchSite> candidates, int count, Rng& rng);

struct PatchGroups {
  std::vector<PatchSite> nonspecular;  ///< lowest specular variance
  std::vector<PatchSite> specular;     ///< highest specular variance
  bool skipped = false;                ///< fewer than four sites were available
};

/// Variance of `specular` over the valid texels of the patch.
double patch_variance(const ScalarMap& specular, const Mask& valid, const PatchSite& site, int size);

/// Stable-sorts `sites` by specular variance (ties keep sample order) and
/// takes floor(N * fraction) from each end.
PatchGroups sad_group_patches(const ScalarMap& specular, const Mask& valid, std::span<const PatchSite> sites,
                              const PatchConfig& config);

/// Per-channel mean (3), per-channel standard deviation (3) and 4 x 4
/// average-pooled luminance (16).
inline constexpr int kPatchFeatures = 22;
using PatchFeature = Eigen::Matrix<double, kPatchFeatures, 1>;

PatchFeature patch_features(const ColorMap& map, const PatchSite& site, int size);
/// Adds d(loss)/d(map) given d(loss)/d(features) into `grad`.
void patch_features_backward(const ColorMap& map, const PatchSite& site, int size, const PatchFeature& grad_features,
                             ColorMap& grad);

/// Median of the squared distances between distinct members of the pooled
/// sample; 1 if that median is 0.
double median_bandwidth(std::span<const PatchFeature> x, std::span<const PatchFeature> y);

struct MmdResult {
  double value = 0.0;
  bool single_sample = false;  ///< a group had one member
};

/// Biased (V-statistic) squared MMD with kernel exp(-|a - b|^2 / bandwidth).
/// Optional outputs receive d(MMD^2)/d(feature) per member.
MmdResult loss_sad_surrogate(std::span<const PatchFeature> x, std::span<const PatchFeature> y, double bandwidth,
                             std::vector<PatchFeature>* grad_x = nullptr,
                             std::vector<PatchFeature>* grad_y = nullptr);

}  // namespace lathe
