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

#include "tsense/sectors.hpp"

#include <cmath>
#include <limits>

#include "tsense/error.hpp"

namespace tsense {

SectorMatrix::SectorMatrix(int work_max) : work_max_(work_max) {
    if (work_max < 0) throw InvalidArgument("negative working cutoff");
    blocks_.reserve(2 * work_max + 1);
    for (int d = -work_max; d <= work_max; ++d) {
        const int n = SectorLayout::size(work_max, d);
        blocks_.emplace_back(Eigen::MatrixXcd::Zero(n, n));
    }
}

SectorMatrix SectorMatrix::identity(int work_max) {
    SectorMatrix out(work_max);
    for (auto& b : out.blocks_) b.setIdentity();
    return out;
}

SectorMatrix SectorMatrix::from_dense(const TwoModeOperator& op) {
    const int w = op.cutoff().per_mode_max;
    SectorMatrix out(w);
    for (int d = -w; d <= w; ++d) {
        auto& b = out.block(d);
        for (int jr = 0; jr < b.rows(); ++jr)
            for (int jc = 0; jc < b.cols(); ++jc)
                b(jr, jc) = op(SectorLayout::k_of(d, jr), SectorLayout::m_of(d, jr), SectorLayout::k_of(d, jc),
                               SectorLayout::m_of(d, jc));
    }
    return out;
}

SectorMatrix SectorMatrix::adjoint() const {
    SectorMatrix out;
    out.work_max_ = work_max_;
    out.blocks_.reserve(blocks_.size());
    for (const auto& b : blocks_) out.blocks_.emplace_back(b.adjoint());
    return out;
}

cplx SectorMatrix::trace() const {
    cplx t = 0.0;
    for (const auto& b : blocks_) t += b.trace();
    return t;
}

TwoModeOperator SectorMatrix::to_dense(const FockCutoff& crop) const {
    const int kmax = crop.per_mode_max;
    if (kmax > work_max_) throw DimensionMismatch("crop cutoff exceeds the working cutoff");
    Eigen::MatrixXcd dense = Eigen::MatrixXcd::Zero(crop.dim(), crop.dim());
    for (int d = -kmax; d <= kmax; ++d) {
        const auto& b = block(d);
        const int g = SectorLayout::grid_size(kmax, d);
        for (int jc = 0; jc < g; ++jc) {
            const int col = TwoModeOperator::index(SectorLayout::k_of(d, jc), SectorLayout::m_of(d, jc), kmax);
            for (int jr = 0; jr < g; ++jr) {
                const int row =
                    TwoModeOperator::index(SectorLayout::k_of(d, jr), SectorLayout::m_of(d, jr), kmax);
                dense(row, col) = b(jr, jc);
            }
        }
    }
    return TwoModeOperator(crop, std::move(dense), false);
}

SectorMatrix operator*(const SectorMatrix& a, const SectorMatrix& b) {
    if (a.work_max_ != b.work_max_) throw DimensionMismatch("sector product with different working cutoffs");
    SectorMatrix out;
    out.work_max_ = a.work_max_;
    out.blocks_.reserve(a.blocks_.size());
    for (std::size_t i = 0; i < a.blocks_.size(); ++i) out.blocks_.emplace_back(a.blocks_[i] * b.blocks_[i]);
    return out;
}

SectorMatrix operator+(const SectorMatrix& a, const SectorMatrix& b) {
    if (a.work_max_ != b.work_max_) throw DimensionMismatch("sector sum with different working cutoffs");
    SectorMatrix out;
    out.work_max_ = a.work_max_;
    out.blocks_.reserve(a.blocks_.size());
    for (std::size_t i = 0; i < a.blocks_.size(); ++i) out.blocks_.emplace_back(a.blocks_[i] + b.blocks_[i]);
    return out;
}

SectorMatrix operator*(double s, const SectorMatrix& a) {
    SectorMatrix out;
    out.work_max_ = a.work_max_;
    out.blocks_.reserve(a.blocks_.size());
    for (const auto& b : a.blocks_) out.blocks_.emplace_back(s * b);
    return out;
}

Eigen::MatrixXd tms_sector_block(double r, int d, int n) { return tms_sector_columns(r, d, n, n); }

Eigen::MatrixXd tms_sector_columns(double r, int d, int n, int cols) {
    if (n <= 0 || cols <= 0) return Eigen::MatrixXd(n > 0 ? n : 0, 0);
    if (cols > n) throw InvalidArgument("tms_sector_columns: more columns than rows");
    const int ad = d < 0 ? -d : d;
    const double tau = std::tanh(r);
    const double log_nu = std::log(std::cosh(r));
    const double log_tau = tau == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(std::abs(tau));

    // g(i) = sqrt((i+|d|)! i!) in log form
    Eigen::VectorXd lg(n);
    for (int i = 0; i < n; ++i) lg(i) = 0.5 * (log_factorial(i + ad) + log_factorial(i));

    // create[j', i] = (-tau)^(j'-i) g(j') / (g(i) (j'-i)!)
    // annihilate[i, j] = tau^(j-i) g(j) / (g(i) (j-i)!)
    // Columns j < cols only touch intermediate indices i <= j < cols.
    Eigen::MatrixXd create = Eigen::MatrixXd::Zero(n, cols);
    Eigen::MatrixXd annihilate = Eigen::MatrixXd::Zero(cols, cols);
    for (int hi = 0; hi < n; ++hi) {
        for (int lo = 0; lo <= hi && lo < cols; ++lo) {
            const int p = hi - lo;
            double mag;
            if (p == 0) {
                mag = 1.0;
            } else if (tau == 0.0) {
                continue;
            } else {
                mag = std::exp(p * log_tau + lg(hi) - lg(lo) - log_factorial(p));
            }
            const bool odd = (p & 1) != 0;
            const double sgn_tau = (odd && tau < 0.0) ? -1.0 : 1.0;
            if (hi < cols) annihilate(lo, hi) = sgn_tau * mag;
            create(hi, lo) = (odd ? -sgn_tau : sgn_tau) * mag;
        }
    }
    Eigen::VectorXd weight(cols);
    for (int i = 0; i < cols; ++i) weight(i) = std::exp(-(2.0 * i + ad + 1.0) * log_nu);

    Eigen::MatrixXd right = weight.asDiagonal() * annihilate.triangularView<Eigen::Upper>().toDenseMatrix();
    Eigen::MatrixXd out(n, cols);
    out.noalias() = create * right;
    return out;
}

SectorMatrix tms_sectors(double r, int work_max) {
    SectorMatrix out(work_max);
    for (int d = -work_max; d <= work_max; ++d)
        out.block(d) = tms_sector_block(r, d, SectorLayout::size(work_max, d)).cast<cplx>();
    return out;
}

void phase_rows(Eigen::MatrixXcd& block, int d, double phi) {
    for (int j = 0; j < block.rows(); ++j) block.row(j) *= std::polar(1.0, -phi * SectorLayout::k_of(d, j));
}

double column_deficit(const SectorMatrix& s, int grid_max, int* bad_k, int* bad_m) {
    const int w = s.work_max();
    if (grid_max > w) throw DimensionMismatch("grid exceeds working cutoff");
    double worst = 0.0;
    for (int d = -grid_max; d <= grid_max; ++d) {
        const auto& b = s.block(d);
        const int g = SectorLayout::grid_size(grid_max, d);
        for (int j = 0; j < g; ++j) {
            const double def = std::abs(1.0 - b.col(j).squaredNorm());
            if (def > worst) {
                worst = def;
                if (bad_k) *bad_k = SectorLayout::k_of(d, j);
                if (bad_m) *bad_m = SectorLayout::m_of(d, j);
            }
        }
    }
    return worst;
}

Eigen::MatrixXd lowering_block(int work_max, int d) {
    if (d <= -work_max || d > work_max) throw InvalidArgument("lowering_block: sector out of range");
    const int n_from = SectorLayout::size(work_max, d);
    const int n_to = SectorLayout::size(work_max, d - 1);
    Eigen::MatrixXd low = Eigen::MatrixXd::Zero(n_to, n_from);
    for (int j = 0; j < n_from; ++j) {
        if (d >= 1) {
            low(j, j) = std::sqrt(static_cast<double>(j + d));
        } else if (j >= 1) {
            low(j - 1, j) = std::sqrt(static_cast<double>(j));
        }
    }
    return low;
}

}  // namespace tsense
