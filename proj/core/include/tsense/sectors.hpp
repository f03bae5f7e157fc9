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
 * Block-diagonal fast path for operators that conserve the photon-number
 * difference d = k - m (squeezers, phase shifts, the channel output state,
 * its loss derivative and the SLD).
 *
 * A working cutoff W keeps the square grid [0, W]^2, which splits exactly
 * into sectors d = -W..W. Inside sector d the kets are labelled by
 * j = min(k, m), j = 0..W-|d|.
 */
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "tsense/fock.hpp"

namespace tsense {

struct SectorLayout {
    static int k_of(int d, int j) noexcept { return j + (d > 0 ? d : 0); }
    static int m_of(int d, int j) noexcept { return j + (d < 0 ? -d : 0); }
    static int j_of(int k, int m) noexcept { return k < m ? k : m; }
    static int size(int work_max, int d) noexcept { return work_max + 1 - (d < 0 ? -d : d); }
    /// Number of kets of sector d with max(k, m) <= grid_max.
    static int grid_size(int grid_max, int d) noexcept {
        const int n = grid_max + 1 - (d < 0 ? -d : d);
        return n > 0 ? n : 0;
    }
};

/// Operator stored as one dense complex block per difference sector.
class SectorMatrix {
public:
    SectorMatrix() = default;
    explicit SectorMatrix(int work_max);

    static SectorMatrix identity(int work_max);
    /// Keeps only the difference-conserving entries of a dense operator.
    static SectorMatrix from_dense(const TwoModeOperator& op);

    int work_max() const noexcept { return work_max_; }
    Eigen::MatrixXcd& block(int d) { return blocks_[d + work_max_]; }
    const Eigen::MatrixXcd& block(int d) const { return blocks_[d + work_max_]; }

    SectorMatrix adjoint() const;
    cplx trace() const;
    /// Dense operator on [0, crop.per_mode_max]^2 (requires crop <= work_max).
    TwoModeOperator to_dense(const FockCutoff& crop) const;

    friend SectorMatrix operator*(const SectorMatrix& a, const SectorMatrix& b);
    friend SectorMatrix operator+(const SectorMatrix& a, const SectorMatrix& b);
    friend SectorMatrix operator*(double s, const SectorMatrix& a);

private:
    int work_max_ = 0;
    std::vector<Eigen::MatrixXcd> blocks_;
};

/// Sector block of S(r): entry (j', j) = <k',m'|S(r)|k,m> with both kets in
/// sector d. Built from the normal-ordered product of the pair-creation,
/// vacuum-weight and pair-annihilation factors, all evaluated in log space.
Eigen::MatrixXd tms_sector_block(double r, int d, int n);

/// First `cols` columns of the same block (n x cols).
Eigen::MatrixXd tms_sector_columns(double r, int d, int n, int cols);

SectorMatrix tms_sectors(double r, int work_max);

/// Multiplies the rows of a sector-d block by exp(-i phi k).
void phase_rows(Eigen::MatrixXcd& block, int d, double phi);

/// Largest |1 - column norm^2| over columns with max(k, m) <= grid_max.
double column_deficit(const SectorMatrix& s, int grid_max, int* bad_k = nullptr, int* bad_m = nullptr);

/// Matrix of a_R from sector d to sector d-1 on the working grid,
/// size(work_max, d-1) x size(work_max, d). Valid for -W < d <= W.
Eigen::MatrixXd lowering_block(int work_max, int d);

}  // namespace tsense
