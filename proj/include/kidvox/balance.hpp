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

#ifndef KIDVOX_BALANCE_HPP_
#define KIDVOX_BALANCE_HPP_

#include <cstdint>

#include "kidvox/features.hpp"

namespace kidvox {

// Borderline oversampling of the minority sex. Original rows come first
// and unchanged; synthetic rows interpolate between a borderline minority
// point and one of its k nearest minority neighbors, carry the source
// row's identity, and are marked synthetic in their meta. Output classes
// are exactly balanced. Already-balanced input is returned as-is.
//
// A minority point is borderline ("in danger") when at least half but not
// all of its k nearest neighbors over the whole data are majority points;
// all-majority neighborhoods are treated as noise and skipped. If no
// point qualifies, interpolation falls back to the whole minority class.
FeatureMatrix borderline_smote(const FeatureMatrix& x, int k, std::uint64_t seed);

}  // namespace kidvox

#endif  // KIDVOX_BALANCE_HPP_
