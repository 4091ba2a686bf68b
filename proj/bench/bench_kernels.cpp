// Copyright 2026 The kidvox Authors
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

// Compares the parallel kernels against their serial references on the
// same inputs and checks that both produce identical results.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kidvox/clustering.hpp"
#include "kidvox/features.hpp"
#include "kidvox/model.hpp"
#include "kidvox/rng.hpp"

namespace {

using namespace kidvox;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  FeatureMatrix x;
  for (std::size_t c = 0; c < cols; ++c) x.feature_names.push_back("f" + std::to_string(c));
  Rng rng(seed);
  x.data.resize(rows * cols);
  for (double& v : x.data) v = rng.gaussian();
  x.meta.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    x.meta[r].subject_id = "s" + std::to_string(r / 4);
    x.meta[r].age = 10;
    x.meta[r].sex = (r / 4) % 2 == 0 ? Sex::F : Sex::M;
    // A weak class signal so trees have something to split on.
    x.at(r, 0) += x.meta[r].sex == Sex::F ? 0.8 : -0.8;
  }
  return x;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("openmp: %d thread(s)\n", omp_get_max_threads());
#else
  std::printf("openmp: not enabled in this build\n");
#endif

  {
    FeatureMatrix x = random_matrix(4000, 64, 7);
    auto t0 = Clock::now();
    std::vector<double> serial = serial::correlation_matrix(x);
    double ts = seconds_since(t0);
    t0 = Clock::now();
    std::vector<double> parallel = correlation_matrix(x);
    double tp = seconds_since(t0);
    bool same = serial == parallel;
    std::printf("correlation 4000x64   serial %7.3fs  parallel %7.3fs  %s\n", ts, tp,
                same ? "identical" : "MISMATCH");
    if (!same) return 1;
  }

  {
    FeatureMatrix x = random_matrix(2000, 32, 11);
    ErfParams p;
    p.n_trees = 200;
    p.seed = 42;
    auto t0 = Clock::now();
    Forest fs = serial::train_erf(x, p);
    double ts = seconds_since(t0);
    t0 = Clock::now();
    Forest fp = train_erf(x, p);
    double tp = seconds_since(t0);
    bool same = forest_to_json(fs) == forest_to_json(fp);
    std::printf("forest 2000x32x200    serial %7.3fs  parallel %7.3fs  %s\n", ts, tp,
                same ? "identical" : "MISMATCH");
    if (!same) return 1;
  }
  return 0;
}
