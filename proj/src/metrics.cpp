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

#include "lathe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Geometry>

namespace lathe {

namespace {

void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": size mismatch");
  if (a == 0) throw std::invalid_argument(std::string(what) + ": no entries");
}

}  // namespace

SiMseResult si_mse(std::span<const double> pred, std::span<const double> target) {
  require_same(pred.size(), target.size(), "si_mse");
  double pp = 0.0, pt = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    pp += pred[i] * pred[i];
    pt += pred[i] * target[i];
  }
  SiMseResult r;
  if (pp == 0.0) {
    r.zero_prediction = true;
  } else {
    r.scale = pt / pp;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = r.scale * pred[i] - target[i];
    sum += d * d;
  }
  r.value = sum / double(pred.size());
  return r;
}

SiMseResult si_mse(const ColorMap& prediction, const ColorMap& target, const Mask* mask) {
  if (!prediction.same_shape(target) || (mask && !mask->same_shape(target)))
    throw std::invalid_argument("si_mse: shape mismatch");
  std::vector<double> p, t;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    for (int c = 0; c < 3; ++c) {
      p.push_back(prediction[i][c]);
      t.push_back(target[i][c]);
    }
  }
  return si_mse(p, t);
}

SiMseResult si_mse(const ScalarMap& prediction, const ScalarMap& target, const Mask* mask) {
  if (!prediction.same_shape(target) || (mask && !mask->same_shape(target)))
    throw std::invalid_argument("si_mse: shape mismatch");
  std::vector<double> p, t;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    p.push_back(prediction[i]);
    t.push_back(target[i]);
  }
  return si_mse(p, t);
}

double mse(std::span<const double> a, std::span<const double> b) {
  require_same(a.size(), b.size(), "mse");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return sum / double(a.size());
}

double rmse(std::span<const double> prediction, std::span<const double> truth) {
  return std::sqrt(mse(prediction, truth));
}

AngularError normal_angular_error(const VectorMap& prediction, const VectorMap& truth, const Mask* mask) {
  if (!prediction.same_shape(truth) || (mask && !mask->same_shape(truth)))
    throw std::invalid_argument("normal_angular_error: shape mismatch");
  AngularError out;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    const Vec3& a = prediction[i];
    const Vec3& b = truth[i];
    for (const Vec3* v : {&a, &b}) {
      const double len = v->norm();
      if (len == 0.0) throw std::invalid_argument("normal_angular_error: zero vector");
      if (std::abs(len - 1.0) > 1e-6) out.renormalized = true;
    }
    // Length-independent and well conditioned near 0 and pi, unlike acos.
    sum += std::atan2(a.cross(b).norm(), a.dot(b));
    ++n;
  }
  if (n == 0) throw std::invalid_argument("normal_angular_error: no entries");
  out.degrees = sum / double(n) * 180.0 / std::numbers::pi;
  return out;
}

double pose_rmse(const CameraPose& p, const CameraPose& t) {
  const double a[4] = {p.pitch, p.roll, p.tx, p.ty};
  const double b[4] = {t.pitch, t.roll, t.tx, t.ty};
  return rmse(a, b);
}

double silhouette_iou(const ScalarMap& a, const ScalarMap& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("silhouette_iou: shape mismatch");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] >= 0.5, y = b[i] >= 0.5;
    inter += (x && y);
    uni += (x || y);
  }
  return uni == 0 ? 1.0 : double(inter) / double(uni);
}

}  // namespace lathe
