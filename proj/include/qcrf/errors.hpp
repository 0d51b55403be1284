// Copyright 2026 The QCRF Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qcrf {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Mismatched lengths or counts between paired objects.
class DimensionError : public Error {
   public:
    using Error::Error;
};

/// A value outside its admissible set (label index, feature sign, weight sum).
class DomainError : public Error {
   public:
    using Error::Error;
};

/// Full enumeration over Q^n label sequences refused.
class EnumerationTooLarge : public Error {
   public:
    EnumerationTooLarge(double count, double cap)
        : Error("enumeration too large: Q^n = " + std::to_string(count) + " exceeds cap " +
                std::to_string(cap)),
          count_(count) {}
    double count() const { return count_; }

   private:
    double count_;
};

/// Training loss increased for too many consecutive iterations.
class DivergenceError : public Error {
   public:
    using Error::Error;
};

/// Invalid configuration (files, schema, precision, rotation constant).
class ConfigError : public Error {
   public:
    using Error::Error;
};

/// A precondition of a register operation does not hold.
class ContractViolation : public Error {
   public:
    using Error::Error;
};

/// Fixed-point register arithmetic left its representable range.
class SaturationError : public Error {
   public:
    SaturationError(const std::string &what, std::uint64_t branch)
        : Error(what + " (branch main=" + std::to_string(branch) + ")"), branch_(branch) {}
    std::uint64_t branch() const { return branch_; }

   private:
    std::uint64_t branch_;
};

/// Repeat-until-success post-selection exhausted its attempt budget.
class PostselectionStarved : public Error {
   public:
    explicit PostselectionStarved(std::uint64_t attempts)
        : Error("post-selection starved after " + std::to_string(attempts) + " attempts"),
          attempts_(attempts) {}
    std::uint64_t attempts() const { return attempts_; }

   private:
    std::uint64_t attempts_;
};

}  // namespace qcrf
