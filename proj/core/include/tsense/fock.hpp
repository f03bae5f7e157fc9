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
 * Truncated two-mode Fock space: basis layout, dense operators, two-mode
 * squeezer matrix elements, phase shifts and ladder operators.
 *
 * Basis kets are |k, m> with k the photon number of the returned probe R and
 * m that of the idler I. The flat index is row-major, k * (K + 1) + m, where
 * K is the per-mode cutoff.
 *
 * The two-mode squeezer is S(r) = exp(r (a_R a_I - a_R^dag a_I^dag)), so that
 * S(r)|0,0> = (1/cosh r) sum_n (-tanh r)^n |n,n> and <0,0|S(r)|0,0> > 0.
 */
#pragma once

#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace tsense {

using cplx = std::complex<double>;

/// Per-mode photon-number cutoff and the truncated probability mass it is
/// allowed to lose.
struct FockCutoff {
    int per_mode_max = 25;
    double tail_tol = 1e-8;

    int dim_per_mode() const noexcept { return per_mode_max + 1; }
    int dim() const noexcept { return dim_per_mode() * dim_per_mode(); }
    void validate() const;

    bool operator==(const FockCutoff&) const = default;
};

/// Real two-mode squeeze strength with its derived tanh / cosh.
class SqueezeParams {
public:
    explicit SqueezeParams(double r = 0.0);

    double r() const noexcept { return r_; }
    double tau() const noexcept { return tau_; }
    double nu() const noexcept { return nu_; }

    bool operator==(const SqueezeParams& o) const noexcept { return r_ == o.r_; }

private:
    double r_;
    double tau_;
    double nu_;
};

enum class Mode { R, I };

/// Dense complex matrix over the truncated two-mode Fock basis.
class TwoModeOperator {
public:
    TwoModeOperator(FockCutoff cutoff, Eigen::MatrixXcd entries, bool hermitian = false);

    static TwoModeOperator identity(const FockCutoff& cutoff);
    static TwoModeOperator zero(const FockCutoff& cutoff);

    static int index(int k, int m, int per_mode_max) noexcept {
        return k * (per_mode_max + 1) + m;
    }
    int index(int k, int m) const noexcept { return index(k, m, cutoff_.per_mode_max); }
    std::pair<int, int> ket(int flat) const noexcept {
        return {flat / cutoff_.dim_per_mode(), flat % cutoff_.dim_per_mode()};
    }

    const FockCutoff& cutoff() const noexcept { return cutoff_; }
    int dim() const noexcept { return static_cast<int>(entries_.rows()); }
    const Eigen::MatrixXcd& entries() const noexcept { return entries_; }
    bool hermitian() const noexcept { return hermitian_; }

    /// <k,m| A |kp,mp>
    cplx operator()(int k, int m, int kp, int mp) const {
        return entries_(index(k, m), index(kp, mp));
    }

    TwoModeOperator adjoint() const;
    cplx trace() const { return entries_.trace(); }

    /// Marks the operator Hermitian; throws if the entries disagree with their
    /// conjugate transpose by more than 1e-12 (relative to the largest entry).
    TwoModeOperator& mark_hermitian();

    friend TwoModeOperator operator*(const TwoModeOperator& a, const TwoModeOperator& b);
    friend TwoModeOperator operator+(const TwoModeOperator& a, const TwoModeOperator& b);
    friend TwoModeOperator operator-(const TwoModeOperator& a, const TwoModeOperator& b);
    friend TwoModeOperator operator*(cplx s, const TwoModeOperator& a);

private:
    FockCutoff cutoff_;
    Eigen::MatrixXcd entries_;
    bool hermitian_;
};

/// log(n!) via log-Gamma accumulation (cached for small n).
double log_factorial(int n);

/// Matrix elements <k',m'|S(r)|k,m> on the truncated grid, from the explicit
/// double sum over the annihilated (i1) and created (a1) pair counts.
/// Columns with k + m <= per_mode_max / 2 must keep their norm to within
/// tail_tol; otherwise CutoffTooSmall is thrown.
TwoModeOperator tms_matrix_elements(const SqueezeParams& params, const FockCutoff& cutoff);

/// Diagonal phase shift on the returned mode: |k,m> -> exp(-i phi k) |k,m>.
TwoModeOperator phase_shift_diag(double phi, const FockCutoff& cutoff);

/// (a, a^dag) for the requested mode, tensored with the identity on the other.
std::pair<TwoModeOperator, TwoModeOperator> ladder_ops(const FockCutoff& cutoff, Mode mode);

/// A rho A^dag.
TwoModeOperator apply_sandwich(const TwoModeOperator& a, const TwoModeOperator& rho);

}  // namespace tsense
