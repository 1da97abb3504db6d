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

#include "lathe/losses.hpp"

#include <cmath>

namespace lathe {

void validate(const LossWeights& w) {
  for (double v : {w.silhouette, w.distance, w.image, w.albedo, w.sad, w.diffuse, w.diffuse_target,
                   w.diffuse_margin})
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("loss weights must be finite and non-negative");
}

Mask silhouette_foreground(const ScalarMap& target) {
  Mask m(target.rows(), target.cols(), 0);
  for (std::size_t i = 0; i < target.size(); ++i) m[i] = target[i] > 0.0 ? 1 : 0;
  return m;
}

SilhouetteLoss loss_silhouette(const ScalarMap& target, const ScalarMap& rendered, const ScalarMap& dt,
                               const LossWeights& w) {
  if (!target.same_shape(rendered) || !target.same_shape(dt))
    throw std::invalid_argument("loss_silhouette: shape mismatch");
  SilhouetteLoss out;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = target[i] - rendered[i];
    out.squared += d * d;
    out.distance += dt[i] * rendered[i];
  }
  const double n = double(target.size());
  out.squared /= n;
  out.distance /= n;
  out.total = w.silhouette * out.squared + w.distance * out.distance;
  return out;
}

SilhouetteLoss loss_silhouette(const ScalarMap& target, const ScalarMap& rendered, const LossWeights& w) {
  return loss_silhouette(target, rendered, distance_transform(silhouette_foreground(target)).distance, w);
}

MaskedLoss loss_image(const ColorMap& target, const ColorMap& rendered, const Mask& mask) {
  if (!target.same_shape(rendered) || !target.same_shape(mask))
    throw std::invalid_argument("loss_image: shape mismatch");
  MaskedLoss out;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (!mask[i]) continue;
    sum += (target[i] - rendered[i]).cwiseAbs().sum();
    ++n;
  }
  if (n == 0) {
    out.empty_mask = true;
    return out;
  }
  out.value = sum / (3.0 * double(n));
  return out;
}

double loss_diffuse_reg(double mean_diffuse, const LossWeights& w) {
  const double u = std::abs(mean_diffuse - w.diffuse_target) - w.diffuse_margin;
  return u > 0.0 ? u * u : 0.0;
}

NonFiniteLoss::NonFiniteLoss(const std::string& term, double value)
    : std::runtime_error("non-finite loss term '" + term + "' (" + std::to_string(value) + ")"), term_(term) {}

double loss_total(const LossTerms& t, const LossWeights& w) {
  const std::pair<const char*, double> named[] = {
      {"silhouette", t.silhouette}, {"image", t.image}, {"albedo", t.albedo}, {"sad", t.sad}, {"diffuse", t.diffuse}};
  for (const auto& [name, value] : named)
    if (!std::isfinite(value)) throw NonFiniteLoss(name, value);
  return t.silhouette + w.image * t.image + w.albedo * t.albedo + w.sad * t.sad + w.diffuse * t.diffuse;
}

}  // namespace lathe
