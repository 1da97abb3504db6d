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

#include <span>

#include "lathe/geometry.hpp"
#include "lathe/grid.hpp"

namespace lathe {

struct SiMseResult {
  double value = 0.0;
  double scale = 0.0;           ///< the minimising s
  bool zero_prediction = false; ///< prediction was all zero; value is mean(target^2)
};

/// min_s mean((s * pred - target)^2) with one scale shared by every entry.
/// Throws std::invalid_argument on size mismatch or no entries.
SiMseResult si_mse(std::span<const double> prediction, std::span<const double> target);
/// Over masked texels and all three channels jointly. An empty mask pointer
/// means every texel.
SiMseResult si_mse(const ColorMap& prediction, const ColorMap& target, const Mask* mask = nullptr);
SiMseResult si_mse(const ScalarMap& prediction, const ScalarMap& target, const Mask* mask = nullptr);

double mse(std::span<const double> a, std::span<const double> b);
double rmse(std::span<const double> prediction, std::span<const double> truth);

struct AngularError {
  double degrees = 0.0;
  bool renormalized = false;  ///< some input was not unit length
};

/// Mean angle between corresponding vectors on the mask, in degrees.
AngularError normal_angular_error(const VectorMap& prediction, const VectorMap& truth, const Mask* mask = nullptr);

/// RMSE over (pitch, roll, tx, ty) in their own units.
double pose_rmse(const CameraPose& prediction, const CameraPose& truth);

/// Intersection over union of two soft masks thresholded at 0.5.
double silhouette_iou(const ScalarMap& a, const ScalarMap& b);

}  // namespace lathe
