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

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tsense/error.hpp"
#include "tsense/fock.hpp"
#include "tsense/sectors.hpp"

using namespace tsense;

namespace {

// Largest entry gap over kets with k + m <= K/2 on both sides.
double inner_gap(const Eigen::MatrixXcd& a, const Eigen::MatrixXd& b, int kmax) {
    double worst = 0.0;
    for (int k = 0; k <= kmax; ++k)
        for (int m = 0; k + m <= kmax / 2; ++m)
            for (int kp = 0; kp <= kmax; ++kp)
                for (int mp = 0; kp + mp <= kmax / 2; ++mp) {
                    const int i = TwoModeOperator::index(kp, mp, kmax), j = TwoModeOperator::index(k, m, kmax);
                    worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
                }
    return worst;
}

}  // namespace

class SqueezerOracle : public ::testing::TestWithParam<double> {};

TEST_P(SqueezerOracle, MatchesSectorExponential) {
    const double r = GetParam();
    const FockCutoff cut{12, 0.9};
    const auto s = tms_matrix_elements(SqueezeParams(r), cut);
    const Eigen::MatrixXd ref = oracle::squeezer_by_sector(r, 150, 12);
    EXPECT_LE(inner_gap(s.entries(), ref, 12), 1e-8);
}

INSTANTIATE_TEST_SUITE_P(Squeeze, SqueezerOracle, ::testing::Values(0.1, 0.3, 0.7, 1.0, -0.5));

TEST(Squeezer, MatchesDenseExponential) {
    const FockCutoff cut{8, 0.9};
    const auto s = tms_matrix_elements(SqueezeParams(0.3), cut);
    const Eigen::MatrixXd ref = oracle::squeezer_dense(0.3, 22, 8);
    EXPECT_LE(inner_gap(s.entries(), ref, 8), 1e-10);
}

TEST(Squeezer, VacuumColumnIsTwoModeSqueezedVacuum) {
    const double r = 0.4;
    const FockCutoff cut{15, 1e-2};
    const auto s = tms_matrix_elements(SqueezeParams(r), cut);
    for (int n = 0; n <= 15; ++n) {
        const double expect = std::pow(-std::tanh(r), n) / std::cosh(r);
        EXPECT_NEAR(s(n, n, 0, 0).real(), expect, 1e-13);
        EXPECT_NEAR(s(n, n, 0, 0).imag(), 0.0, 1e-15);
    }
    EXPECT_EQ(s(1, 0, 0, 0), cplx(0.0));
}

TEST(Squeezer, ZeroIsIdentity) {
    const FockCutoff cut{6, 1e-8};
    const auto s = tms_matrix_elements(SqueezeParams(0.0), cut);
    EXPECT_LE((s.entries() - Eigen::MatrixXcd::Identity(s.dim(), s.dim())).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Squeezer, ConservesPhotonDifference) {
    const FockCutoff cut{10, 1e-2};
    const auto s = tms_matrix_elements(SqueezeParams(0.35), cut);
    for (int i = 0; i < s.dim(); ++i)
        for (int j = 0; j < s.dim(); ++j) {
            const auto [k, m] = s.ket(i);
            const auto [kp, mp] = s.ket(j);
            if (k - m != kp - mp) EXPECT_EQ(s.entries()(i, j), cplx(0.0));
        }
}

TEST(Squeezer, AdjointIsOppositeSqueeze) {
    const FockCutoff cut{14, 1e-4};
    const auto plus = tms_matrix_elements(SqueezeParams(0.25), cut);
    const auto minus = tms_matrix_elements(SqueezeParams(-0.25), cut);
    EXPECT_LE((plus.adjoint().entries() - minus.entries()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Squeezer, ComposesAdditively) {
    const FockCutoff cut{24, 1e-8};
    const auto a = tms_matrix_elements(SqueezeParams(0.15), cut);
    const auto b = tms_matrix_elements(SqueezeParams(0.1), cut);
    const auto ab = tms_matrix_elements(SqueezeParams(0.25), cut);
    const Eigen::MatrixXcd prod = (a * b).entries();
    EXPECT_LE(inner_gap(prod, ab.entries().real(), 24), 1e-9);
}

TEST(Squeezer, InnerBlockIsUnitary) {
    const FockCutoff cut{20, 1e-8};
    const auto s = tms_matrix_elements(SqueezeParams(0.2), cut);
    const Eigen::MatrixXcd g = s.adjoint().entries() * s.entries();
    EXPECT_LE(inner_gap(g, Eigen::MatrixXd::Identity(g.rows(), g.cols()), 20), 1e-8);
}

TEST(Squeezer, SmallCutoffIsRejected) {
    EXPECT_THROW(tms_matrix_elements(SqueezeParams(0.7), FockCutoff{3, 1e-8}), CutoffTooSmall);
    try {
        tms_matrix_elements(SqueezeParams(0.7), FockCutoff{12, 1e-8});
        FAIL() << "expected CutoffTooSmall";
    } catch (const CutoffTooSmall& e) {
        EXPECT_GT(e.deficit(), 1e-8);
    }
}

TEST(Squeezer, LargeCutoffKeepsInnerColumnsNormalised) {
    const auto s = tms_matrix_elements(SqueezeParams(0.5), FockCutoff{30, 1e-2});
    const int j = s.index(3, 2);
    EXPECT_NEAR(s.entries().col(j).squaredNorm(), 1.0, 1e-8);
}

TEST(SectorKernel, BlocksMatchDenseEmbedding) {
    const double r = 0.45;
    const int w = 18;
    const SectorMatrix sec = tms_sectors(r, w);
    const auto dense = tms_matrix_elements(SqueezeParams(r), FockCutoff{w, 0.9});
    const auto back = sec.to_dense(FockCutoff{w, 0.9});
    EXPECT_LE((back.entries() - dense.entries()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(SectorKernel, DensePassThroughIsExact) {
    const auto dense = tms_matrix_elements(SqueezeParams(0.3), FockCutoff{9, 0.9});
    const SectorMatrix sec = SectorMatrix::from_dense(dense);
    EXPECT_LE((sec.to_dense(FockCutoff{9, 0.9}).entries() - dense.entries()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(PhaseShift, ActsOnReturnedModeOnly) {
    const FockCutoff cut{5, 1e-8};
    const auto u = phase_shift_diag(0.3, cut);
    EXPECT_NEAR(std::arg(u(2, 4, 2, 4)), -0.6, 1e-14);
    EXPECT_NEAR(std::arg(u(0, 5, 0, 5)), 0.0, 1e-14);
    EXPECT_EQ(u(1, 0, 0, 1), cplx(0.0));
}

TEST(Ladder, CanonicalCommutatorAwayFromEdge) {
    const FockCutoff cut{7, 1e-8};
    for (Mode mode : {Mode::R, Mode::I}) {
        const auto [a, ad] = ladder_ops(cut, mode);
        const auto c = (a * ad) - (ad * a);
        for (int k = 0; k < 7; ++k)
            for (int m = 0; m < 7; ++m) EXPECT_NEAR(c(k, m, k, m).real(), 1.0, 1e-14);
    }
    const auto [a, ad] = ladder_ops(cut, Mode::R);
    EXPECT_LE((ad.entries() - a.entries().adjoint()).cwiseAbs().maxCoeff(), 0.0);
    const Eigen::MatrixXcd ref = oracle::on_returned(oracle::lowering(7));
    EXPECT_LE((a.entries() - ref).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Sandwich, PreservesHermiticityAndTrace) {
    const FockCutoff cut{6, 1e-8};
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(49, 49);
    rho(0, 0) = 0.6;
    rho(8, 8) = 0.4;
    rho(0, 8) = cplx(0.1, 0.2);
    rho(8, 0) = std::conj(rho(0, 8));
    TwoModeOperator state(cut, rho, true);
    const auto u = phase_shift_diag(0.7, cut);
    const auto out = apply_sandwich(u, state);
    EXPECT_TRUE(out.hermitian());
    EXPECT_NEAR(out.trace().real(), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(out.entries()(0, 8)), std::abs(rho(0, 8)), 1e-15);
}

TEST(TwoModeOperator, RejectsMismatchedShapes) {
    EXPECT_THROW(TwoModeOperator(FockCutoff{3, 1e-8}, Eigen::MatrixXcd::Zero(4, 4)), DimensionMismatch);
    const auto a = TwoModeOperator::identity(FockCutoff{3, 1e-8});
    const auto b = TwoModeOperator::identity(FockCutoff{4, 1e-8});
    EXPECT_THROW(a * b, DimensionMismatch);
}

TEST(TwoModeOperator, MarkHermitianRejectsNonHermitian) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
    m(0, 1) = 1.0;
    TwoModeOperator op(FockCutoff{1, 1e-8}, m);
    EXPECT_THROW(op.mark_hermitian(), InvalidArgument);
}

TEST(LogFactorial, MatchesLgammaBeyondTable) {
    for (int n : {0, 1, 10, 170, 1023, 1024, 5000}) EXPECT_NEAR(log_factorial(n), std::lgamma(n + 1.0), 1e-9 * (1 + n));
}
