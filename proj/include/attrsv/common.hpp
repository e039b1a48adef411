// attrsv/common.hpp

// Copyright 2026  The attrsv authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ATTRSV_COMMON_HPP
#define ATTRSV_COMMON_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace attrsv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Bad or inconsistent configuration (exit code 2 at the CLI).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
};

/// Malformed, missing or mismatched data artifacts (exit code 3 at the CLI).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string &msg) : std::runtime_error(msg) {}
};

/// Numerical failure: divergence, rank deficiency (exit code 4 at the CLI).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string &msg) : std::runtime_error(msg) {}
};

}  // namespace attrsv

#endif  // ATTRSV_COMMON_HPP
