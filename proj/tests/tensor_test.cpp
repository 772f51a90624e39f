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

#include <cmath>

#include "cascade/ops.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cascade;
using testutil::finite_diff_check;
using testutil::random_param;

TEST_CASE("matmul identity and hand arithmetic") {
  auto id = Tensor<double>::from({2, 2}, {1, 0, 0, 1});
  auto m = Tensor<double>::from({2, 2}, {3.5, -1.0, 2.0, 7.25});
  auto r = matmul(id, m);
  CHECK(r.data() == m.data());

  auto a = Tensor<double>::from({1, 2}, {1, 2});
  auto b = Tensor<double>::from({2, 1}, {3, 4});
  CHECK(matmul(a, b).scalar() == doctest::Approx(11.0));
}

TEST_CASE("matmul shape mismatch names both shapes") {
  auto a = Tensor<double>::zeros({3, 4});
  auto b = Tensor<double>::zeros({5, 2});
  try {
    matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    std::string msg = e.what();
    CHECK(msg.find("3x4") != std::string::npos);
    CHECK(msg.find("5x2") != std::string::npos);
  }
}

TEST_CASE("log_softmax examples") {
  auto r = log_softmax_rows(Tensor<double>::from({1, 2}, {0, 0}));
  CHECK(r.data()[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  CHECK(r.data()[1] == doctest::Approx(-std::log(2.0)).epsilon(1e-12));

  // Shift invariance forces the same result without overflow.
  auto big = log_softmax_rows(Tensor<double>::from({1, 2}, {1000, 1000}));
  CHECK(big.data()[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  CHECK(std::isfinite(big.data()[0]));

  // Direct 64-bit reference for [0, 1, 2].
  auto v = log_softmax_rows(Tensor<double>::from({1, 3}, {0, 1, 2}));
  const double z = std::log(std::exp(0.0) + std::exp(1.0) + std::exp(2.0));
  for (int j = 0; j < 3; ++j) {
    CHECK(std::fabs(v.data()[j] - (j - z)) <= 1e-6);
  }
}

TEST_CASE("log_softmax rows exponentiate to one") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto t = random_param<double>({3, 5}, rng, -10, 10);
    auto r = log_softmax_rows(t);
    for (int i = 0; i < 3; ++i) {
      double sum = 0;
      for (int j = 0; j < 5; ++j) sum += std::exp(r.data()[i * 5 + j]);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("log_softmax shift invariance") {
  Rng rng(11);
  auto t = random_param<double>({2, 4}, rng, -3, 3);
  std::vector<double> shifted = t.data();
  for (size_t i = 0; i < 4; ++i) shifted[i] += 17.5;
  for (size_t i = 4; i < 8; ++i) shifted[i] += -3.25;
  auto r1 = log_softmax_rows(t);
  auto r2 = log_softmax_rows(Tensor<double>::from({2, 4}, std::move(shifted)));
  for (size_t i = 0; i < 8; ++i) {
    CHECK(r1.data()[i] == doctest::Approx(r2.data()[i]).epsilon(1e-9));
  }
}

TEST_CASE("log_add absorbing, analytic, and deep-underflow cases") {
  CHECK(log_add(-1.25, kLogZero) == doctest::Approx(-1.25));
  CHECK(log_add(kLogZero, -1.25) == doctest::Approx(-1.25));
  CHECK(log_add(std::log(0.5), std::log(0.5)) == doctest::Approx(0.0));
  // exp(-745) underflows a double; the max-shift form must not.
  const double v = log_add(-745.0, -745.0);
  CHECK(v == doctest::Approx(-745.0 + std::log(2.0)).epsilon(1e-12));
  CHECK(!is_log_zero(v));
  CHECK(is_log_zero(log_add(kLogZero, kLogZero)));
}

TEST_CASE("ops are deterministic") {
  Rng rng(3);
  auto a = random_param<double>({4, 6}, rng);
  auto b = random_param<double>({6, 3}, rng);
  auto r1 = matmul(a, b);
  auto r2 = matmul(a, b);
  CHECK(r1.data() == r2.data());
  auto s1 = log_softmax_rows(a);
  auto s2 = log_softmax_rows(a);
  CHECK(s1.data() == s2.data());
}

TEST_CASE("finite differences validate every primitive op backward") {
  // Relative error <= 1e-3 at h = 1e-3 in 64-bit mode, >= 20 seeds.
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    auto a = random_param<double>({3, 4}, rng);
    auto b = random_param<double>({4, 2}, rng);
    auto c = random_param<double>({3, 4}, rng);
    auto v = random_param<double>({1, 4}, rng);

    CHECK(finite_diff_check<double>(
              [&] { return sum_all(matmul(a, b)); }, {a, b}) <= 1e-3);
    CHECK(finite_diff_check<double>([&] { return sum_all(mul(a, c)); },
                                    {a, c}) <= 1e-3);
    CHECK(finite_diff_check<double>(
              [&] { return sum_all(add(a, c)); }, {a, c}) <= 1e-3);
    CHECK(finite_diff_check<double>(
              [&] { return sum_all(add_rowvec(a, v)); }, {a, v}) <= 1e-3);
    CHECK(finite_diff_check<double>(
              [&] { return sum_all(tanh_op(a)); }, {a}) <= 1e-3);
    CHECK(finite_diff_check<double>(
              [&] { return sum_all(sigmoid(a)); }, {a}) <= 1e-3);
    CHECK(finite_diff_check<double>(
              [&] { return sum_all(transpose(a)); }, {a}) <= 1e-3);
    CHECK(finite_diff_check<double>(
              [&] { return sum_all(slice_rows(a, 1, 3)); }, {a}) <= 1e-3);
    CHECK(finite_diff_check<double>(
              [&] { return sum_all(slice_cols(a, 1, 3)); }, {a}) <= 1e-3);
    CHECK(finite_diff_check<double>(
              [&] { return sum_all(concat<double>({a, c}, 0)); }, {a, c}) <=
          1e-3);
    CHECK(finite_diff_check<double>(
              [&] { return sum_all(concat<double>({a, c}, 1)); }, {a, c}) <=
          1e-3);
    CHECK(finite_diff_check<double>(
              [&] { return sum_all(scale(a, 2.5)); }, {a}) <= 1e-3);

    // log_softmax needs a non-uniform downstream weight, otherwise the
    // gradient is identically zero.
    auto w = random_param<double>({3, 4}, rng);
    CHECK(finite_diff_check<double>(
              [&] { return sum_all(mul(log_softmax_rows(a), w)); }, {a}) <=
          1e-3);

    auto table = random_param<double>({5, 3}, rng);
    std::vector<int> ids = {2, 0, 2, 4};
    CHECK(finite_diff_check<double>(
              [&] { return sum_all(gather_rows(table, ids)); }, {table}) <=
          1e-3);

    auto rows = random_param<double>({4, 3}, rng);
    std::vector<int> picks = {1, 0, 2, 1};
    CHECK(finite_diff_check<double>(
              [&] { return sum_all(take_per_row(rows, picks)); }, {rows}) <=
          1e-3);

    auto enc = random_param<double>({3, 4}, rng);
    auto pred = random_param<double>({2, 4}, rng);
    auto bias = random_param<double>({1, 4}, rng);
    auto lattice_w = random_param<double>({6, 4}, rng);
    CHECK(finite_diff_check<double>(
              [&] {
                return sum_all(mul(outer_add_bias(enc, pred, bias), lattice_w));
              },
              {enc, pred, bias}) <= 1e-3);

    auto seq = random_param<double>({6, 2}, rng);
    CHECK(finite_diff_check<double>(
              [&] { return sum_all(im2col(seq, 3, 2, 1, 2)); }, {seq}) <=
          1e-3);
  }
}

TEST_CASE("gather_rows rejects out-of-range ids") {
  auto table = Tensor<double>::zeros({4, 2});
  CHECK_THROWS_AS(gather_rows(table, {4}), VocabError);
  CHECK_THROWS_AS(gather_rows(table, {-1}), VocabError);
}

TEST_CASE("backward accumulates through shared subexpressions") {
  // f = sum(a*a) => df/da = 2a.
  auto a = Tensor<double>::param({1, 3}, {1.0, -2.0, 0.5});
  auto out = sum_all(mul(a, a));
  auto gm = backward(out);
  const auto* g = gm.find(a.node().get());
  REQUIRE(g != nullptr);
  CHECK((*g)[0] == doctest::Approx(2.0));
  CHECK((*g)[1] == doctest::Approx(-4.0));
  CHECK((*g)[2] == doctest::Approx(1.0));
}

TEST_CASE("values stay finite for finite inputs") {
  Rng rng(19);
  auto a = random_param<double>({4, 4}, rng, -50, 50);
  for (auto fn : {&tanh_op<double>, &sigmoid<double>, &log_softmax_rows<double>}) {
    auto out = fn(a);
    for (double x : out.data()) CHECK(std::isfinite(x));
  }
}
