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

#ifndef KIDVOX_FEATURE_VECTOR_HPP_
#define KIDVOX_FEATURE_VECTOR_HPP_

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kidvox {

// Named feature values for one sample. A feature that could not be
// computed is simply absent; stored values are always finite.
class FeatureVector {
 public:
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return names_.size(); }

  bool has(const std::string& name) const { return find(name) >= 0; }

  std::optional<double> get(const std::string& name) const {
    auto i = find(name);
    if (i < 0) return std::nullopt;
    return values_[static_cast<std::size_t>(i)];
  }

  // Inserts or replaces. Non-finite values are rejected: "missing" is
  // expressed by not setting the name at all.
  void set(const std::string& name, double v) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("non-finite value for feature " + name);
    }
    auto i = find(name);
    if (i >= 0) {
      values_[static_cast<std::size_t>(i)] = v;
    } else {
      names_.push_back(name);
      values_.push_back(v);
    }
  }

  // set() when the value exists and is finite; otherwise leaves the
  // feature missing.
  void set_optional(const std::string& name, std::optional<double> v) {
    if (v && std::isfinite(*v)) set(name, *v);
  }

 private:
  std::ptrdiff_t find(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) return static_cast<std::ptrdiff_t>(i);
    }
    return -1;
  }

  std::vector<std::string> names_;
  std::vector<double> values_;
};

}  // namespace kidvox

#endif  // KIDVOX_FEATURE_VECTOR_HPP_
