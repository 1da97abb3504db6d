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

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace lathe {

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const AdamSettings&) const = default;
};

/// Adaptive-moment gradient descent on a fixed-size parameter block.
class Adam {
 public:
  Adam(std::size_t size, double learning_rate, AdamSettings settings = {})
      : lr_(learning_rate), s_(settings), m_(size, 0.0), v_(size, 0.0) {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("Adam: learning rate must be positive");
  }

  void step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) throw std::invalid_argument("Adam: size mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(s_.beta1, double(t_));
    const double c2 = 1.0 - std::pow(s_.beta2, double(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = s_.beta1 * m_[i] + (1.0 - s_.beta1) * grad[i];
      v_[i] = s_.beta2 * v_[i] + (1.0 - s_.beta2) * grad[i] * grad[i];
      params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + s_.epsilon);
    }
  }

  void set_learning_rate(double lr) {
    if (!(lr > 0.0)) throw std::invalid_argument("Adam: learning rate must be positive");
    lr_ = lr;
  }
  double learning_rate() const { return lr_; }
  long steps() const { return t_; }

 private:
  double lr_;
  AdamSettings s_;
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
};

}  // namespace lathe
