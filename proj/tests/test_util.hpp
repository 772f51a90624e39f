// Copyright 2026 The Cascade Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cascade/tensor.hpp"

namespace cascade::testutil {

// Central finite differences of a scalar-valued function against the
// gradients reported by backward(). `f` must rebuild its graph on each call
// (the leaves are mutated in place between calls). Returns the worst
// relative error across all elements of all leaves.
template <class S>
double finite_diff_check(const std::function<Tensor<S>()>& f,
                         const std::vector<Tensor<S>>& leaves,
                         double h = 1e-3) {
  Tensor<S> out = f();
  GradMap<S> gm = backward(out);
  double worst = 0.0;
  for (const auto& leaf : leaves) {
    const std::vector<S>* g = gm.find(leaf.node().get());
    std::vector<S> analytic(leaf.numel(), S(0));
    if (g) analytic = *g;
    auto& data = const_cast<std::vector<S>&>(leaf.data());
    for (size_t i = 0; i < data.size(); ++i) {
      const S orig = data[i];
      data[i] = orig + static_cast<S>(h);
      const double up = static_cast<double>(f().scalar());
      data[i] = orig - static_cast<S>(h);
      const double dn = static_cast<double>(f().scalar());
      data[i] = orig;
      const double fd = (up - dn) / (2.0 * h);
      const double an = static_cast<double>(analytic[i]);
      const double denom = std::max({std::fabs(fd), std::fabs(an), 1.0});
      worst = std::max(worst, std::fabs(fd - an) / denom);
    }
  }
  return worst;
}

template <class S>
Tensor<S> random_param(std::vector<int> shape, Rng& rng, double lo = -1.0,
                       double hi = 1.0) {
  return Tensor<S>::uniform_param(std::move(shape), rng, lo, hi);
}

}  // namespace cascade::testutil
