// Copyright 2026 The fthlab Authors
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

#include <stdexcept>
#include <string>

namespace fthlab {

/// Thrown when a caller breaks an operation's documented precondition
/// (mismatched lengths, wrong shapes, infeasible initial guesses).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a requested evaluation lies outside the data's support.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid experiment or discretization configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A trajectory left the finite range. Carries the first offending node.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(double time, int node, const std::string& what)
      : std::runtime_error(what + " (blow-up at t=" + std::to_string(time) +
                           ", node " + std::to_string(node) + ")"),
        time_(time),
        node_(node) {}

  double time() const noexcept { return time_; }
  int node() const noexcept { return node_; }

 private:
  double time_;
  int node_;
};

/// An iterative procedure exhausted its budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedFamilyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace fthlab
