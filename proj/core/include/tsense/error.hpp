// Copyright 2026 The tsense Authors
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

namespace tsense {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Operands live on different truncated spaces.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// The Fock cutoff cannot certify the requested truncation tolerance.
class CutoffTooSmall : public Error {
public:
    CutoffTooSmall(const std::string& what, double deficit)
        : Error(what), deficit_(deficit) {}
    double deficit() const noexcept { return deficit_; }

private:
    double deficit_;
};

/// A covariance matrix violates the uncertainty principle.
class NonPhysicalState : public Error {
public:
    using Error::Error;
};

/// An iterative or closed-form decomposition missed its residual target.
class ConvergenceFailure : public Error {
public:
    ConvergenceFailure(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// The TMS+PNR receiver cannot reach the quantum Fisher information at the
/// requested transmittance (outside the measurement's existence region).
class ExistenceFailure : public Error {
public:
    ExistenceFailure(const std::string& what, double theta, double ratio)
        : Error(what), theta_(theta), ratio_(ratio) {}
    double theta() const noexcept { return theta_; }
    double ratio() const noexcept { return ratio_; }

private:
    double theta_;
    double ratio_;
};

/// Two independent evaluation routes of the same quantity disagree.
class RouteDisagreement : public Error {
public:
    RouteDisagreement(const std::string& what, double gap)
        : Error(what), gap_(gap) {}
    double gap() const noexcept { return gap_; }

private:
    double gap_;
};

/// Too few Monte Carlo trials for the requested statistic.
class InsufficientTrials : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem or archive failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace tsense
