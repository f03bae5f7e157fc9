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

/**
 * @file
 * Fast invariant suite behind `tsense validate`: operator identities on the
 * truncated grid, both p.m.f. routes, Gaussian moment traces, the loss
 * derivative against finite differences, the p.m.f. lower bound and the
 * CFI / QFI ratio at the true parameters.
 */
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tsense/fock.hpp"
#include "tsense/gaussian.hpp"

namespace tsense {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidationOptions {
    FockCutoff cutoff{20, 1e-8};
    ChannelParams channel{0.9, 0.7, 0.3, 0.4};
    /// Negate the receiver squeeze in the block-product route only.
    bool inject_sign_flip = false;
};

/// Every check runs even when an earlier one fails; exceptions are reported
/// as failures with their message.
std::vector<CheckResult> run_validation_suite(const ValidationOptions& opts = {});

bool all_passed(const std::vector<CheckResult>& results);
void print_report(std::ostream& out, const std::vector<CheckResult>& results);

}  // namespace tsense
