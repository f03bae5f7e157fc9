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

#include "tsense/fock.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "tsense/error.hpp"
#include "tsense/sectors.hpp"

namespace tsense {

namespace {

constexpr int kFactorialCache = 1024;

const std::array<double, kFactorialCache>& factorial_table() {
    static const std::array<double, kFactorialCache> table = [] {
        std::array<double, kFactorialCache> t{};
        t[0] = 0.0;
        for (int n = 1; n < kFactorialCache; ++n) t[n] = t[n - 1] + std::log(static_cast<double>(n));
        return t;
    }();
    return table;
}

void require_same_cutoff(const TwoModeOperator& a, const TwoModeOperator& b, const char* what) {
    if (!(a.cutoff().per_mode_max == b.cutoff().per_mode_max)) {
        std::ostringstream msg;
        msg << what << ": cutoff " << a.cutoff().per_mode_max << " vs " << b.cutoff().per_mode_max;
        throw DimensionMismatch(msg.str());
    }
}

}  // namespace

void FockCutoff::validate() const {
    if (per_mode_max < 1) throw InvalidArgument("per_mode_max must be >= 1");
    if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw InvalidArgument("tail_tol must lie in (0, 1)");
}

SqueezeParams::SqueezeParams(double r) : r_(r), tau_(std::tanh(r)), nu_(std::cosh(r)) {
    if (!std::isfinite(r)) throw InvalidArgument("squeeze parameter must be finite");
}

double log_factorial(int n) {
    if (n < 0) throw InvalidArgument("log_factorial of a negative integer");
    if (n < kFactorialCache) return factorial_table()[n];
    return std::lgamma(static_cast<double>(n) + 1.0);
}

TwoModeOperator::TwoModeOperator(FockCutoff cutoff, Eigen::MatrixXcd entries, bool hermitian)
    : cutoff_(cutoff), entries_(std::move(entries)), hermitian_(false) {
    if (cutoff_.per_mode_max < 0) throw InvalidArgument("negative cutoff");
    if (entries_.rows() != entries_.cols() || entries_.rows() != cutoff_.dim())
        throw DimensionMismatch("operator entries do not match the cutoff dimension");
    if (hermitian) mark_hermitian();
}

TwoModeOperator TwoModeOperator::identity(const FockCutoff& cutoff) {
    return TwoModeOperator(cutoff, Eigen::MatrixXcd::Identity(cutoff.dim(), cutoff.dim()), true);
}

TwoModeOperator TwoModeOperator::zero(const FockCutoff& cutoff) {
    return TwoModeOperator(cutoff, Eigen::MatrixXcd::Zero(cutoff.dim(), cutoff.dim()), true);
}

TwoModeOperator& TwoModeOperator::mark_hermitian() {
    const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
    const double asym = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale) {
        std::ostringstream msg;
        msg << "operator is not Hermitian (max asymmetry " << asym << ")";
        throw InvalidArgument(msg.str());
    }
    hermitian_ = true;
    return *this;
}

TwoModeOperator TwoModeOperator::adjoint() const {
    return TwoModeOperator(cutoff_, entries_.adjoint(), false);
}

TwoModeOperator operator*(const TwoModeOperator& a, const TwoModeOperator& b) {
    require_same_cutoff(a, b, "operator product");
    return TwoModeOperator(a.cutoff_, a.entries_ * b.entries_, false);
}

TwoModeOperator operator+(const TwoModeOperator& a, const TwoModeOperator& b) {
    require_same_cutoff(a, b, "operator sum");
    TwoModeOperator out(a.cutoff_, a.entries_ + b.entries_, false);
    out.hermitian_ = a.hermitian_ && b.hermitian_;
    return out;
}

TwoModeOperator operator-(const TwoModeOperator& a, const TwoModeOperator& b) {
    require_same_cutoff(a, b, "operator difference");
    TwoModeOperator out(a.cutoff_, a.entries_ - b.entries_, false);
    out.hermitian_ = a.hermitian_ && b.hermitian_;
    return out;
}

TwoModeOperator operator*(cplx s, const TwoModeOperator& a) {
    TwoModeOperator out(a.cutoff_, s * a.entries_, false);
    out.hermitian_ = a.hermitian_ && s.imag() == 0.0;
    return out;
}

TwoModeOperator tms_matrix_elements(const SqueezeParams& params, const FockCutoff& cutoff) {
    cutoff.validate();
    const int kmax = cutoff.per_mode_max;
    const int dim = cutoff.dim();
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(dim, dim);
    for (int d = -kmax; d <= kmax; ++d) {
        const int n = kmax + 1 - std::abs(d);
        const Eigen::MatrixXd block = tms_sector_block(params.r(), d, n);
        for (int jc = 0; jc < n; ++jc) {
            const int col = TwoModeOperator::index(SectorLayout::k_of(d, jc), SectorLayout::m_of(d, jc), kmax);
            for (int jr = 0; jr < n; ++jr) {
                const int row = TwoModeOperator::index(SectorLayout::k_of(d, jr), SectorLayout::m_of(d, jr), kmax);
                s(row, col) = block(jr, jc);
            }
        }
    }
    // Columns whose photon sum is at most half the cutoff must be certified.
    double worst = 0.0;
    int worst_k = 0, worst_m = 0;
    for (int k = 0; k <= kmax; ++k) {
        for (int m = 0; k + m <= kmax / 2; ++m) {
            const double deficit = std::abs(1.0 - s.col(TwoModeOperator::index(k, m, kmax)).squaredNorm());
            if (deficit > worst) {
                worst = deficit;
                worst_k = k;
                worst_m = m;
            }
        }
    }
    if (worst > cutoff.tail_tol) {
        std::ostringstream msg;
        msg << "squeezer column (" << worst_k << "," << worst_m << ") loses " << worst
            << " of its norm at cutoff " << kmax << " (r = " << params.r() << ")";
        throw CutoffTooSmall(msg.str(), worst);
    }
    return TwoModeOperator(cutoff, std::move(s), false);
}

TwoModeOperator phase_shift_diag(double phi, const FockCutoff& cutoff) {
    const int dim = cutoff.dim();
    Eigen::VectorXcd diag(dim);
    for (int k = 0; k <= cutoff.per_mode_max; ++k) {
        const cplx phase = std::polar(1.0, -phi * k);
        for (int m = 0; m <= cutoff.per_mode_max; ++m)
            diag(TwoModeOperator::index(k, m, cutoff.per_mode_max)) = phase;
    }
    return TwoModeOperator(cutoff, diag.asDiagonal().toDenseMatrix(), false);
}

std::pair<TwoModeOperator, TwoModeOperator> ladder_ops(const FockCutoff& cutoff, Mode mode) {
    const int kmax = cutoff.per_mode_max;
    const int dim = cutoff.dim();
    Eigen::MatrixXcd lower = Eigen::MatrixXcd::Zero(dim, dim);
    for (int k = 0; k <= kmax; ++k) {
        for (int m = 0; m <= kmax; ++m) {
            const int n = mode == Mode::R ? k : m;
            if (n == 0) continue;
            const int src = TwoModeOperator::index(k, m, kmax);
            const int dst = mode == Mode::R ? TwoModeOperator::index(k - 1, m, kmax)
                                            : TwoModeOperator::index(k, m - 1, kmax);
            lower(dst, src) = std::sqrt(static_cast<double>(n));
        }
    }
    Eigen::MatrixXcd raise = lower.adjoint();
    return {TwoModeOperator(cutoff, std::move(lower)), TwoModeOperator(cutoff, std::move(raise))};
}

TwoModeOperator apply_sandwich(const TwoModeOperator& a, const TwoModeOperator& rho) {
    require_same_cutoff(a, rho, "apply_sandwich");
    Eigen::MatrixXcd out = a.entries() * rho.entries() * a.entries().adjoint();
    if (rho.hermitian()) {
        out = 0.5 * (out + out.adjoint()).eval();
        return TwoModeOperator(rho.cutoff(), std::move(out), true);
    }
    return TwoModeOperator(rho.cutoff(), std::move(out), false);
}

}  // namespace tsense
