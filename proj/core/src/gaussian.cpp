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

#include "tsense/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "tsense/error.hpp"
#include "tsense/receiver.hpp"

namespace tsense {

double wrap_phase(double phi) {
    constexpr double pi = std::numbers::pi;
    double w = std::remainder(phi, 2.0 * pi);
    if (w <= -pi) w += 2.0 * pi;
    return w;
}

double ChannelParams::n_t() const {
    if (theta >= 1.0) return std::numeric_limits<double>::infinity();
    return n_b / (1.0 - theta);
}

void ChannelParams::validate() const {
    if (!std::isfinite(theta) || !std::isfinite(gamma) || !std::isfinite(n_s) || !std::isfinite(n_b))
        throw InvalidArgument("channel parameters must be finite");
    if (!(theta > 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in (0, 1]");
    if (n_s < 0.0) throw InvalidArgument("n_s must be non-negative");
    if (!(n_b > 0.0)) throw InvalidArgument("n_b must be positive");
    if (!(gamma > -std::numbers::pi && gamma <= std::numbers::pi))
        throw InvalidArgument("gamma must lie in (-pi, pi]");
}

double GaussianState::uncertainty_margin() const {
    Eigen::Matrix4cd h = cov.cast<cplx>();
    const cplx i(0.0, 1.0);
    for (int b = 0; b < 2; ++b) {
        h(2 * b, 2 * b + 1) += i;
        h(2 * b + 1, 2 * b) -= i;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void GaussianState::validate(double tol) const {
    if (!mean.allFinite() || !cov.allFinite()) throw NonPhysicalState("Gaussian state has non-finite entries");
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > tol) throw NonPhysicalState("covariance is not symmetric");
    const double margin = uncertainty_margin();
    if (margin < -tol) {
        std::ostringstream msg;
        msg << "covariance violates the uncertainty relation (min eigenvalue " << margin << ")";
        throw NonPhysicalState(msg.str());
    }
}

double SqueezedThermalForm::mu() const { return std::cosh(zeta); }
double SqueezedThermalForm::nu() const { return -std::sinh(zeta); }

GaussianState covariance_from_moments(double n_r, double n_i, cplx pair) {
    GaussianState g;
    g.cov.setZero();
    g.cov.block<2, 2>(0, 0) = (2.0 * n_i + 1.0) * Eigen::Matrix2d::Identity();
    g.cov.block<2, 2>(2, 2) = (2.0 * n_r + 1.0) * Eigen::Matrix2d::Identity();
    Eigen::Matrix2d cross;
    cross << 2.0 * pair.real(), 2.0 * pair.imag(), 2.0 * pair.imag(), -2.0 * pair.real();
    g.cov.block<2, 2>(2, 0) = cross;
    g.cov.block<2, 2>(0, 2) = cross.transpose();
    return g;
}

GaussianState output_covariance(const ChannelParams& p) {
    p.validate();
    // Probe: two-mode squeezed vacuum with n_s photons per arm.
    GaussianState g = covariance_from_moments(p.n_s, p.n_s, cplx(std::sqrt(p.n_s * (p.n_s + 1.0)), 0.0));
    // Beamsplitter on the signal arm, environment contributing (1 - theta)(2 n_t + 1).
    Eigen::Matrix4d x = Eigen::Matrix4d::Identity();
    x(2, 2) = x(3, 3) = std::sqrt(p.theta);
    g.cov = x * g.cov * x.transpose();
    g.cov.block<2, 2>(2, 2) += p.added_noise() * Eigen::Matrix2d::Identity();
    // a_R -> a_R exp(-i gamma)
    Eigen::Matrix4d rot = Eigen::Matrix4d::Identity();
    const double c = std::cos(p.gamma), s = std::sin(p.gamma);
    rot(2, 2) = c;
    rot(2, 3) = s;
    rot(3, 2) = -s;
    rot(3, 3) = c;
    g.cov = rot * g.cov * rot.transpose();
    return g;
}

GaussianState reconstruct_covariance(const SqueezedThermalForm& form) {
    const double ch = std::cosh(form.zeta), sh = std::sinh(form.zeta);
    const double n_r = ch * ch * form.n1 + sh * sh * (form.n2 + 1.0);
    const double n_i = ch * ch * form.n2 + sh * sh * (form.n1 + 1.0);
    const cplx pair = std::polar(ch * sh * (form.n1 + form.n2 + 1.0), -form.gamma);
    return covariance_from_moments(n_r, n_i, pair);
}

SqueezedThermalForm williamson_two_mode(const GaussianState& g) {
    g.validate();
    const double var_r = 0.5 * (g.cov(2, 2) + g.cov(3, 3));
    const double var_i = 0.5 * (g.cov(0, 0) + g.cov(1, 1));
    const cplx pair(0.25 * (g.cov(2, 0) - g.cov(3, 1)), 0.25 * (g.cov(2, 1) + g.cov(3, 0)));
    const double corr = 2.0 * std::abs(pair);
    const double total = var_r + var_i;
    const double disc = total * total - 4.0 * corr * corr;
    if (!(disc > 0.0)) throw NonPhysicalState("two-mode covariance has no squeezed-thermal normal form");
    const double d = std::sqrt(disc);

    SqueezedThermalForm form;
    form.n1 = 0.5 * (0.5 * (d + var_r - var_i) - 1.0);
    form.n2 = 0.5 * (0.5 * (d - var_r + var_i) - 1.0);
    if (form.n1 < -1e-10 || form.n2 < -1e-10) throw NonPhysicalState("negative thermal occupancy in normal form");
    form.n1 = std::max(form.n1, 0.0);
    form.n2 = std::max(form.n2, 0.0);
    form.zeta = 0.5 * std::atanh(2.0 * corr / total);
    form.gamma = std::abs(pair) > 0.0 ? wrap_phase(-std::arg(pair)) : 0.0;

    const GaussianState back = reconstruct_covariance(form);
    const double residual = (back.cov - g.cov).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, g.cov.cwiseAbs().maxCoeff());
    if (residual > 1e-9 * scale) {
        std::ostringstream msg;
        msg << "normal-form reconstruction residual " << residual;
        throw ConvergenceFailure(msg.str(), residual);
    }
    return form;
}

double r_weight(int s, int t, const SqueezedThermalForm& form) {
    if (s < 0 || t < 0) return 0.0;
    const double q1 = form.n1 / (1.0 + form.n1);
    const double q2 = form.n2 / (1.0 + form.n2);
    return std::pow(q1, s) * (1.0 - q1) * std::pow(q2, t) * (1.0 - q2);
}

double r_tail(const SqueezedThermalForm& form, int w) {
    const double q1 = form.n1 / (1.0 + form.n1);
    const double q2 = form.n2 / (1.0 + form.n2);
    const double in1 = -std::expm1((w + 1.0) * std::log(q1));
    const double in2 = -std::expm1((w + 1.0) * std::log(q2));
    return form.n1 == 0.0 && form.n2 == 0.0 ? 0.0 : 1.0 - in1 * in2;
}

int state_work_cutoff(const SqueezedThermalForm& form, int min_work) {
    const int limit = std::max(min_work, 4 * min_work + 60);
    for (int w = std::max(min_work, 1);; w += 2) {
        double kept = 0.0;
        for (int d = -w; d <= w; ++d) {
            const int n = SectorLayout::size(w, d);
            const Eigen::MatrixXd s = tms_sector_block(form.zeta, d, n);
            for (int j = 0; j < n; ++j)
                kept += r_weight(SectorLayout::k_of(d, j), SectorLayout::m_of(d, j), form) * s.row(j).squaredNorm();
        }
        if (1.0 - kept <= 1e-12 || w >= limit) return w;
    }
}

SectorMatrix density_sectors(const SqueezedThermalForm& form, int work_max) {
    SectorMatrix sigma(work_max);
    for (int d = -work_max; d <= work_max; ++d) {
        const int n = SectorLayout::size(work_max, d);
        const Eigen::MatrixXd s = tms_sector_block(form.zeta, d, n);
        Eigen::VectorXd w(n);
        for (int j = 0; j < n; ++j) w(j) = r_weight(SectorLayout::k_of(d, j), SectorLayout::m_of(d, j), form);
        const Eigen::MatrixXd x = s.transpose() * w.asDiagonal() * s;
        auto& b = sigma.block(d);
        for (int jc = 0; jc < n; ++jc)
            for (int jr = 0; jr < n; ++jr) b(jr, jc) = x(jr, jc) * std::polar(1.0, -form.gamma * (jr - jc));
    }
    return sigma;
}

TwoModeOperator density_matrix_fock(const SqueezedThermalForm& form, const FockCutoff& cutoff) {
    cutoff.validate();
    const int kmax = cutoff.per_mode_max;
    int work = kmax + 8;
    const int work_limit = 4 * kmax + 60;
    for (;; work += 4) {
        const double deficit = column_deficit(tms_sectors(form.zeta, work), kmax);
        if (deficit <= 1e-3 * cutoff.tail_tol || work >= work_limit) break;
    }
    TwoModeOperator rho = density_sectors(form, work).to_dense(cutoff);
    Eigen::MatrixXcd e = rho.entries();
    e = 0.5 * (e + e.adjoint()).eval();
    const double tr = e.trace().real();
    if (1.0 - tr > cutoff.tail_tol) {
        std::ostringstream msg;
        msg << "output state loses " << 1.0 - tr << " of its trace at cutoff " << kmax;
        throw CutoffTooSmall(msg.str(), 1.0 - tr);
    }
    return TwoModeOperator(cutoff, std::move(e), true);
}

SectorMatrix loss_derivative(const SectorMatrix& sigma, double theta, double n_b) {
    if (!(theta > 0.0)) throw InvalidArgument("loss derivative needs theta > 0");
    const int w = sigma.work_max();
    SectorMatrix out(w);
    for (int d = -w; d <= w; ++d) {
        const auto& s = sigma.block(d);
        const int n = static_cast<int>(s.rows());
        Eigen::VectorXd num(n);
        for (int j = 0; j < n; ++j) num(j) = SectorLayout::k_of(d, j);

        Eigen::MatrixXcd down = Eigen::MatrixXcd::Zero(n, n);  // a sigma a^dag
        if (d + 1 <= w) {
            const Eigen::MatrixXd low = lowering_block(w, d + 1);
            down = low * sigma.block(d + 1) * low.transpose();
        }
        Eigen::MatrixXcd up = Eigen::MatrixXcd::Zero(n, n);  // a^dag sigma a
        if (d - 1 >= -w) {
            const Eigen::MatrixXd low = lowering_block(w, d);
            up = low.transpose() * sigma.block(d - 1) * low;
        }
        Eigen::MatrixXcd anti = num.asDiagonal() * s + s * num.asDiagonal();  // {n, sigma}
        const Eigen::MatrixXcd l_lower = 2.0 * down - anti;
        const Eigen::MatrixXcd l_raise = 2.0 * up - anti - 2.0 * s;
        out.block(d) = (-0.5 / theta) * ((n_b + 1.0) * l_lower + n_b * l_raise);
    }
    return out;
}

FisherInfo qfi_transmittance(const ChannelParams& p, const FockCutoff& cutoff) {
    p.validate();
    cutoff.validate();
    const SqueezedThermalForm form = williamson_two_mode(output_covariance(p));
    const int w = state_work_cutoff(form, cutoff.per_mode_max);
    const double tail = r_tail(form, w);
    if (tail > cutoff.tail_tol) {
        std::ostringstream msg;
        msg << "thermal weights lose " << tail << " beyond cutoff " << w;
        throw CutoffTooSmall(msg.str(), tail);
    }
    const SectorMatrix sigma = density_sectors(form, w);
    const SectorSld sld = sld_sectors(sigma, loss_derivative(sigma, p.theta, p.n_b));
    return FisherInfo{sld.qfi};
}

}  // namespace tsense
