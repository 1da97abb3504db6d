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

#include <stdexcept>
#include <string>

#include "lathe/grid.hpp"
#include "lathe/raster.hpp"

namespace lathe {

struct LossWeights {
  double silhouette = 10.0;     ///< lambda_s
  double distance = 100.0;      ///< lambda_dt
  double image = 1.0;           ///< lambda_im
  double albedo = 1.0;          ///< lambda_alb
  double sad = 0.01;            ///< lambda_SAD
  double diffuse = 1.0;         ///< lambda_diff
  double diffuse_target = 0.5;  ///< xi
  double diffuse_margin = 0.1;  ///< Delta

  bool operator==(const LossWeights&) const = default;
};

/// Throws std::invalid_argument if any weight is negative or non-finite.
void validate(const LossWeights& weights);

struct SilhouetteLoss {
  double squared = 0.0;   ///< mean (S - S_hat)^2
  double distance = 0.0;  ///< mean dt(S) * S_hat
  double total = 0.0;     ///< lambda_s * squared + lambda_dt * distance
};

/// Target foreground for the distance transform: pixels with S > 0.
Mask silhouette_foreground(const ScalarMap& target);

/// `target_distance` is distance_transform(silhouette_foreground(target)).
SilhouetteLoss loss_silhouette(const ScalarMap& target, const ScalarMap& rendered, const ScalarMap& target_distance,
                               const LossWeights& weights);
SilhouetteLoss loss_silhouette(const ScalarMap& target, const ScalarMap& rendered, const LossWeights& weights);

struct MaskedLoss {
  double value = 0.0;
  bool empty_mask = false;  ///< no masked pixels; value is 0
};

/// Mean absolute difference over masked pixels and all channels.
MaskedLoss loss_image(const ColorMap& target, const ColorMap& rendered, const Mask& mask);

/// max(|mean - xi| - Delta, 0)^2.
double loss_diffuse_reg(double mean_diffuse, const LossWeights& weights);

struct LossTerms {
  double silhouette = 0.0;  ///< already weighted internally
  double image = 0.0;
  double albedo = 0.0;
  double sad = 0.0;
  double diffuse = 0.0;
};

/// Raised when a loss term is NaN or infinite; what() names the term.
class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(const std::string& term, double value);
  const std::string& term() const { return term_; }

 private:
  std::string term_;
};

/// silhouette + lambda_im image + lambda_alb albedo + lambda_SAD sad
/// + lambda_diff diffuse. Throws NonFiniteLoss naming the first bad term.
double loss_total(const LossTerms& terms, const LossWeights& weights);

}  // namespace lathe
