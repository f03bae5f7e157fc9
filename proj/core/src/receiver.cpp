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

#include "tsense/receiver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "tsense/error.hpp"

namespace tsense {

namespace {

constexpr double kProbFloor = 1e-14;
constexpr double kRankRel = 1e-12;

std::atomic<bool> g_sign_flip{false};

double receiver_squeeze(const ReceiverConfig& c) {
    return g_sign_flip.load(std::memory_order_relaxed) ? -c.omega.r() : c.omega.r();
}

void finish_table(PmfTable& t) {
    const double worst = t.probs.minCoeff();
    if (worst < -1e-10) {
        std::ostringstream msg;
        msg << "p.m.f. entry " << worst << " is negative beyond round-off";
        throw ConvergenceFailure(msg.str(), -worst);
    }
    t.probs = t.probs.cwiseMax(0.0);
    t.tail_mass = std::max(0.0, 1.0 - t.probs.sum());
    if (t.tail_mass > t.config.cutoff.tail_tol) {
        std::ostringstream msg;
        msg << "p.m.f. tail mass " << t.tail_mass << " exceeds " << t.config.cutoff.tail_tol << " at cutoff "
            << t.config.cutoff.per_mode_max;
        throw CutoffTooSmall(msg.str(), t.tail_mass);
    }
}

SqueezedThermalForm form_of(const ChannelParams& c) { return williamson_two_mode(output_covariance(c)); }

// Literal term-by-term amplitude <s,t|S(zeta) U_R(phi) S(omega)|k,m>.
class ExplicitAmplitude {
public:
    ExplicitAmplitude(double omega, double zeta, double phi, int max_n) : phi_(phi) {
        tau1_ = std::tanh(omega);
        tau2_ = std::tanh(zeta);
        ln_nu1_ = std::log(std::cosh(omega));
        ln_nu2_ = std::log(std::cosh(zeta));
        lf_.resize(max_n + 1);
        for (int i = 0; i <= max_n; ++i) lf_[i] = log_factorial(i);
    }

    cplx operator()(int s, int t, int k, int m) const {
        cplx total = 0.0;
        double total_abs = 0.0;
        const int i1_max = std::min(k, m);
        for (int i1 = 0; i1 <= i1_max; ++i1) {
            double prev_slice = std::numeric_limits<double>::infinity();
            for (int a1 = 0;; ++a1) {
                if (a1 > 0 && tau1_ == 0.0) break;
                const int k1 = k - i1 + a1;
                const int m1 = m - i1 + a1;
                if (k1 + m1 + s + t + 2 >= static_cast<int>(lf_.size()))
                    throw ConvergenceFailure("explicit amplitude sum ran past its factorial table", prev_slice);
                const int i2_lo = std::max(0, k - s - i1 + a1);
                const int i2_hi = std::min(k1, m1);
                double slice_abs = 0.0;
                for (int i2 = i2_lo; i2 <= i2_hi; ++i2) {
                    const int a2 = s - k + i1 - a1 + i2;
                    if (tau2_ == 0.0 && a2 + i2 > 0) continue;
                    double lg = 0.0;
                    if (a1 + i1 > 0) lg += (a1 + i1) * std::log(std::abs(tau1_));
                    lg -= (k + m - 2 * i1 + 1) * ln_nu1_;
                    lg -= lf_[a1] + lf_[i1];
                    lg += 0.5 * (lf_[k] + lf_[m] + lf_[k1] + lf_[m1]);
                    lg -= lf_[k - i1] + lf_[m - i1];
                    if (a2 + i2 > 0) lg += (a2 + i2) * std::log(std::abs(tau2_));
                    lg -= (k1 + m1 - 2 * i2 + 1) * ln_nu2_;
                    lg -= lf_[a2] + lf_[i2];
                    lg += 0.5 * (lf_[k1] + lf_[m1] + lf_[s] + lf_[t]);
                    lg -= lf_[k1 - i2] + lf_[m1 - i2];
                    const double mag = std::exp(lg);
                    int neg = a1 + a2;
                    if (tau1_ < 0.0) neg += a1 + i1;
                    if (tau2_ < 0.0) neg += a2 + i2;
                    const double signed_mag = (neg & 1) ? -mag : mag;
                    total += signed_mag * std::polar(1.0, -phi_ * k1);
                    slice_abs += mag;
                }
                total_abs += slice_abs;
                if (total_abs > 0.0 && slice_abs <= 1e-17 * total_abs && slice_abs <= prev_slice) break;
                if (total_abs == 0.0 && a1 > 4 * (k + m + s + t) + 40) break;
                prev_slice = slice_abs;
            }
        }
        return total;
    }

private:
    double tau1_, tau2_, ln_nu1_, ln_nu2_, phi_;
    std::vector<double> lf_;
};

Eigen::MatrixXd pmf_explicit(const SqueezedThermalForm& form, const ReceiverConfig& config) {
    const int kmax = config.cutoff.per_mode_max;
    const double phi = config.gamma_hat - form.gamma;
    const ExplicitAmplitude amp(config.omega.r(), form.zeta, phi, 40 * kmax + 2000);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(kmax + 1, kmax + 1);
    for (int k = 0; k <= kmax; ++k) {
        for (int m = 0; m <= kmax; ++m) {
            double acc = 0.0;
            for (int s = std::max(0, k - m);; ++s) {
                const int t = s - k + m;
                const double r = r_weight(s, t, form);
                if (r < 1e-17) break;
                acc += r * std::norm(amp(s, t, k, m));
            }
            p(k, m) = acc;
        }
    }
    return p;
}

}  // namespace

namespace testing_hooks {
void set_sandwich_sign_flip(bool on) { g_sign_flip.store(on); }
bool sandwich_sign_flip() { return g_sign_flip.load(); }
}  // namespace testing_hooks

void ReceiverConfig::validate() const {
    cutoff.validate();
    if (!std::isfinite(omega.r())) throw InvalidArgument("receiver squeeze must be finite");
    if (!(gamma_hat > -std::numbers::pi && gamma_hat <= std::numbers::pi))
        throw InvalidArgument("gamma_hat must lie in (-pi, pi]");
}

// ---------------------------------------------------------------------------
// SLD

TwoModeOperator SldResult::projector(int i) const {
    const Eigen::VectorXcd v = eigenvectors.col(i);
    return TwoModeOperator(lambda_op.cutoff(), v * v.adjoint(), true);
}

SldResult sld_operator(const TwoModeOperator& sigma, const TwoModeOperator& dsigma) {
    if (sigma.cutoff().per_mode_max != dsigma.cutoff().per_mode_max)
        throw DimensionMismatch("sld_operator: state and derivative cutoffs differ");
    const Eigen::MatrixXcd s = 0.5 * (sigma.entries() + sigma.entries().adjoint());
    const Eigen::MatrixXcd ds = 0.5 * (dsigma.entries() + dsigma.entries().adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s);
    const Eigen::VectorXd p = es.eigenvalues();
    const Eigen::MatrixXcd& v = es.eigenvectors();
    const double tol = kRankRel * std::max(p.maxCoeff(), 0.0);
    const Eigen::MatrixXcd dv = v.adjoint() * ds * v;
    const int n = static_cast<int>(p.size());
    Eigen::MatrixXcd lam = Eigen::MatrixXcd::Zero(n, n);
    long guarded = 0;
    double qfi = 0.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double den = p(i) + p(j);
            if (den > tol) {
                lam(i, j) = 2.0 * dv(i, j) / den;
                qfi += 2.0 * std::norm(dv(i, j)) / den;
            } else {
                ++guarded;
            }
        }
    }
    Eigen::MatrixXcd lam_fock = v * lam * v.adjoint();
    lam_fock = 0.5 * (lam_fock + lam_fock.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ls(lam_fock);

    SldResult out{TwoModeOperator(sigma.cutoff(), lam_fock, true), {}, ls.eigenvectors(), qfi, 0.0, false};
    out.eigenvalues.assign(ls.eigenvalues().data(), ls.eigenvalues().data() + n);
    out.guarded_fraction = static_cast<double>(guarded) / (static_cast<double>(n) * n);
    out.rank_deficient = out.guarded_fraction > 0.1;
    return out;
}

SectorSld sld_sectors(const SectorMatrix& sigma, const SectorMatrix& dsigma) {
    const int w = sigma.work_max();
    if (dsigma.work_max() != w) throw DimensionMismatch("sld_sectors: working cutoffs differ");
    std::vector<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>> eig(2 * w + 1);
    double top = 0.0;
    for (int d = -w; d <= w; ++d) {
        const Eigen::MatrixXcd s = 0.5 * (sigma.block(d) + sigma.block(d).adjoint());
        eig[d + w].compute(s);
        top = std::max(top, eig[d + w].eigenvalues().maxCoeff());
    }
    const double tol = kRankRel * top;
    SectorSld out{SectorMatrix(w), 0.0, 0.0};
    long guarded = 0, total = 0;
    for (int d = -w; d <= w; ++d) {
        const auto& es = eig[d + w];
        const Eigen::VectorXd& p = es.eigenvalues();
        const Eigen::MatrixXcd& v = es.eigenvectors();
        const Eigen::MatrixXcd ds = 0.5 * (dsigma.block(d) + dsigma.block(d).adjoint());
        const Eigen::MatrixXcd dv = v.adjoint() * ds * v;
        const int n = static_cast<int>(p.size());
        Eigen::MatrixXcd lam = Eigen::MatrixXcd::Zero(n, n);
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const double den = p(i) + p(j);
                if (den > tol) {
                    lam(i, j) = 2.0 * dv(i, j) / den;
                    out.qfi += 2.0 * std::norm(dv(i, j)) / den;
                } else {
                    ++guarded;
                }
            }
        }
        total += static_cast<long>(n) * n;
        out.lambda.block(d) = v * lam * v.adjoint();
    }
    out.guarded_fraction = total > 0 ? static_cast<double>(guarded) / total : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// p.m.f. routes

int receiver_work_cutoff(const ReceiverConfig& config, const ChannelParams& channel) {
    config.validate();
    const int kmax = config.cutoff.per_mode_max;
    // The state is most spread at full transmittance.
    int w = std::max(state_work_cutoff(form_of(channel.with_theta(1.0)), kmax + 4),
                     state_work_cutoff(form_of(channel), kmax + 4));
    // Edge cells of the grid collect amplitude from far outside it once the
    // receiver squeezes, so the trace alone does not fix W.
    const int limit = 4 * kmax + 60;
    LikelihoodModel coarse(config, channel, w);
    while (w < limit) {
        LikelihoodModel fine(config, channel, w + 4);
        bool stable = true;
        for (double th : {channel.theta, 1.0}) {
            const Eigen::MatrixXd& a = coarse.probs(th);
            const Eigen::MatrixXd& b = fine.probs(th);
            stable = stable && ((a - b).array().abs() <= 1e-9 * b.array().abs() + 1e-22).all();
        }
        if (stable) return w;
        w += 4;
        coarse = std::move(fine);
    }
    return w;
}

PmfTable pmf_tms_pnr(double theta, const ReceiverConfig& config, const ChannelParams& channel, PmfRoute route) {
    config.validate();
    const ChannelParams state = channel.with_theta(theta);
    state.validate();
    PmfTable t;
    t.theta = theta;
    t.config = config;
    if (route == PmfRoute::ExplicitSums) {
        t.probs = pmf_explicit(form_of(state), config);
    } else {
        LikelihoodModel model(config, channel);
        t.probs = model.probs(theta);
        t.theta = LikelihoodModel::quantize(theta);
    }
    finish_table(t);
    return t;
}

double pmf_route_gap(double theta, const ReceiverConfig& config, const ChannelParams& channel) {
    const double tq = LikelihoodModel::quantize(theta);
    const ChannelParams state = channel.with_theta(tq);
    const Eigen::MatrixXd a = pmf_explicit(form_of(state), config);
    LikelihoodModel model(config, state);
    const Eigen::MatrixXd b = model.probs(tq);
    const double gap = (a - b).cwiseAbs().maxCoeff();
    if (gap > 1e-6) {
        std::ostringstream msg;
        msg << "p.m.f. routes disagree by " << gap << " (convention mismatch)";
        throw RouteDisagreement(msg.str(), gap);
    }
    return gap;
}

Eigen::MatrixXd pmf_theta_derivative(double theta, const ReceiverConfig& config, const ChannelParams& channel) {
    config.validate();
    const ReceiverScan scan(channel.with_theta(theta), config.gamma_hat, config.cutoff,
                            receiver_work_cutoff(config, channel));
    return scan.dpmf(config.omega.r());
}

FisherInfo classical_fisher_info(const Eigen::MatrixXd& pmf, const Eigen::MatrixXd& dpmf) {
    if (pmf.rows() != dpmf.rows() || pmf.cols() != dpmf.cols())
        throw DimensionMismatch("classical_fisher_info: shape mismatch");
    double fi = 0.0;
    for (Eigen::Index c = 0; c < pmf.cols(); ++c)
        for (Eigen::Index r = 0; r < pmf.rows(); ++r)
            if (pmf(r, c) > kProbFloor) fi += dpmf(r, c) * dpmf(r, c) / pmf(r, c);
    return FisherInfo{fi};
}

FisherInfo classical_fisher_info(const PmfTable& pmf, const Eigen::MatrixXd& dpmf) {
    return classical_fisher_info(pmf.probs, dpmf);
}

// ---------------------------------------------------------------------------
// ReceiverScan

ReceiverScan::ReceiverScan(const ChannelParams& state, double gamma_hat, const FockCutoff& cutoff, int work_max)
    : grid_max_(cutoff.per_mode_max), work_max_(work_max), form_(form_of(state)) {
    cutoff.validate();
    if (work_max_ <= 0) work_max_ = state_work_cutoff(form_, grid_max_ + 4);
    if (work_max_ < grid_max_) throw InvalidArgument("working cutoff below the outcome grid");
    const SectorMatrix sigma = density_sectors(form_, work_max_);
    const SectorMatrix dsigma = loss_derivative(sigma, state.theta, state.n_b);
    qfi_ = sld_sectors(sigma, dsigma).qfi;

    // Undo the receiver phase: U_R^dag(gamma_hat) X U_R(gamma_hat).
    state_re_.resize(2 * grid_max_ + 1);
    deriv_re_.resize(2 * grid_max_ + 1);
    for (int d = -grid_max_; d <= grid_max_; ++d) {
        const int n = SectorLayout::size(work_max_, d);
        Eigen::MatrixXd s(n, n), ds(n, n);
        for (int jc = 0; jc < n; ++jc) {
            for (int jr = 0; jr < n; ++jr) {
                const cplx ph = std::polar(1.0, gamma_hat * (jr - jc));
                s(jr, jc) = (sigma.block(d)(jr, jc) * ph).real();
                ds(jr, jc) = (dsigma.block(d)(jr, jc) * ph).real();
            }
        }
        state_re_[d + grid_max_] = 0.5 * (s + s.transpose());
        deriv_re_[d + grid_max_] = 0.5 * (ds + ds.transpose());
    }
}

void ReceiverScan::project(double omega, Eigen::MatrixXd* p, Eigen::MatrixXd* dp) const {
    const int kmax = grid_max_;
    if (p) p->setZero(kmax + 1, kmax + 1);
    if (dp) dp->setZero(kmax + 1, kmax + 1);
    for (int d = -kmax; d <= kmax; ++d) {
        const int n = SectorLayout::size(work_max_, d);
        const int g = SectorLayout::grid_size(kmax, d);
        const Eigen::MatrixXd cols = tms_sector_columns(omega, d, n, g);
        if (p) {
            const Eigen::VectorXd v = (cols.cwiseProduct(state_re_[d + kmax] * cols)).colwise().sum().transpose();
            for (int j = 0; j < g; ++j) (*p)(SectorLayout::k_of(d, j), SectorLayout::m_of(d, j)) = v(j);
        }
        if (dp) {
            const Eigen::VectorXd v = (cols.cwiseProduct(deriv_re_[d + kmax] * cols)).colwise().sum().transpose();
            for (int j = 0; j < g; ++j) (*dp)(SectorLayout::k_of(d, j), SectorLayout::m_of(d, j)) = v(j);
        }
    }
}

ReceiverScan::Point ReceiverScan::evaluate(double omega) const {
    Eigen::MatrixXd p, dp;
    project(omega, &p, &dp);
    p = p.cwiseMax(0.0);
    return Point{classical_fisher_info(p, dp).value, std::max(0.0, 1.0 - p.sum())};
}

Eigen::MatrixXd ReceiverScan::pmf(double omega) const {
    Eigen::MatrixXd p;
    project(omega, &p, nullptr);
    return p.cwiseMax(0.0);
}

Eigen::MatrixXd ReceiverScan::dpmf(double omega) const {
    Eigen::MatrixXd dp;
    project(omega, nullptr, &dp);
    return dp;
}

// ---------------------------------------------------------------------------
// select_omega

OmegaSelection select_omega_detailed(double theta_hat, double gamma_hat, const ChannelParams& channel_template,
                                     const FockCutoff& cutoff) {
    const ChannelParams state = channel_template.with_theta(theta_hat).with_gamma(wrap_phase(gamma_hat));
    state.validate();
    const ReceiverScan scan(state, wrap_phase(gamma_hat), cutoff);
    OmegaSelection sel;
    sel.qfi = scan.qfi();
    sel.work_max = scan.work_max();
    if (!(sel.qfi > 0.0)) throw ExistenceFailure("output state carries no transmittance information", theta_hat, 0.0);

    auto cfi = [&](double w) {
        ++sel.evaluations;
        return scan.evaluate(w).cfi;
    };
    constexpr double step = 0.1;
    const double lo = -2.0;
    std::vector<double> xs, ys;
    for (int i = 0; i <= 40; ++i) {
        xs.push_back(lo + step * i);
        ys.push_back(cfi(xs.back()));
    }
    auto best = [&] { return static_cast<int>(std::max_element(ys.begin(), ys.end()) - ys.begin()); };
    int b = best();
    for (int widen = 0; widen < 4 && (b == 0 || b == static_cast<int>(xs.size()) - 1); ++widen) {
        if (b == 0) {
            for (int i = 1; i <= 10; ++i) {
                xs.insert(xs.begin(), xs.front() - step);
                ys.insert(ys.begin(), cfi(xs.front()));
            }
        } else {
            for (int i = 1; i <= 10; ++i) {
                xs.push_back(xs.back() + step);
                ys.push_back(cfi(xs.back()));
            }
        }
        b = best();
    }
    sel.bracket_lo = xs.front();
    sel.bracket_hi = xs.back();

    // Golden-section on the cells either side of the best grid point.
    double a = xs[std::max(b - 1, 0)];
    double c = xs[std::min<int>(b + 1, static_cast<int>(xs.size()) - 1)];
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = c - invphi * (c - a), x2 = a + invphi * (c - a);
    double f1 = cfi(x1), f2 = cfi(x2);
    while (c - a > 1e-6) {
        if (f1 >= f2) {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - invphi * (c - a);
            f1 = cfi(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (c - a);
            f2 = cfi(x2);
        }
    }
    double w_best = f1 >= f2 ? x1 : x2;
    double f_best = std::max(f1, f2);
    if (ys[b] > f_best) {
        w_best = xs[b];
        f_best = ys[b];
    }
    sel.omega = SqueezeParams(w_best);
    sel.cfi = f_best;
    sel.ratio = f_best / sel.qfi;
    sel.certified = sel.ratio >= 0.99;
    if (sel.ratio < 0.9) {
        std::ostringstream msg;
        msg << "receiver reaches only " << sel.ratio << " of the QFI at theta_hat = " << theta_hat
            << " (outside the measurement's existence region)";
        throw ExistenceFailure(msg.str(), theta_hat, sel.ratio);
    }
    return sel;
}

SqueezeParams select_omega(double theta_hat, double gamma_hat, const ChannelParams& channel_template,
                           const FockCutoff& cutoff) {
    return select_omega_detailed(theta_hat, gamma_hat, channel_template, cutoff).omega;
}

// ---------------------------------------------------------------------------
// Lower bound

LowerBoundReport pmf_lower_bound_check(const PmfTable& pmf, const SqueezedThermalForm& form,
                                       const ReceiverConfig& config) {
    LowerBoundReport rep;
    const double t1 = config.omega.tau(), t2 = std::tanh(form.zeta);
    const double n1 = config.omega.nu(), n2 = std::cosh(form.zeta);
    const double phi = config.gamma_hat - form.gamma;
    const double cphi = std::cos(phi);
    const cplx e = std::polar(1.0, phi);
    rep.l1 = std::norm(n2 * t2 / n1 + n1 * n2 * t1 * (e + t1 * t2));
    rep.l2 = n1 * n1 * n2 * n2 * (1.0 + t1 * t1 * t2 * t2 + 2.0 * t1 * t2 * cphi);
    rep.l3 = (t1 * t1 + 2.0 * t1 * t2 * cphi + t2 * t2) / (1.0 + t1 * t1 * t2 * t2 + 2.0 * t1 * t2 * cphi);
    if (rep.l2 < 1.0 - 1e-12 || !(rep.l3 > 0.0 && rep.l3 < 1.0)) rep.ok = false;

    const double ll2 = std::log(rep.l2), ll3 = std::log(rep.l3);
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < pmf.probs.rows(); ++k) {
        for (int m = 0; m < pmf.probs.cols(); ++m) {
            const double r = r_weight(k, m, form);
            const double bound = r > 0.0 ? std::exp(std::log(r) + (k + m) * ll3 - (k + m + 1) * ll2) : 0.0;
            const double margin = pmf.probs(k, m) - bound;
            if (margin < rep.worst_margin) rep.worst_margin = margin;
            if (margin < -1e-12 && rep.bad_k < 0) {
                rep.ok = false;
                rep.bad_k = k;
                rep.bad_m = m;
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// LikelihoodModel

LikelihoodModel::LikelihoodModel(const ReceiverConfig& config, const ChannelParams& channel_template, int work_max)
    : config_(config), template_(channel_template), work_max_(work_max) {
    config_.validate();
    const int kmax = config_.cutoff.per_mode_max;
    if (work_max_ <= 0) work_max_ = receiver_work_cutoff(config_, template_);
    const double omega = receiver_squeeze(config_);
    const double phi = config_.gamma_hat - template_.gamma;
    receiver_cols_.resize(2 * kmax + 1);
    for (int d = -kmax; d <= kmax; ++d) {
        const int n = SectorLayout::size(work_max_, d);
        const int g = SectorLayout::grid_size(kmax, d);
        Eigen::MatrixXcd z = tms_sector_columns(omega, d, n, g).cast<cplx>();
        phase_rows(z, d, phi);
        receiver_cols_[d + kmax] = std::move(z);
    }
}

Eigen::MatrixXd LikelihoodModel::compute(double theta) const {
    const SqueezedThermalForm form = form_of(template_.with_theta(theta));
    const int kmax = config_.cutoff.per_mode_max;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(kmax + 1, kmax + 1);
    const double q1 = form.n1 / (1.0 + form.n1), q2 = form.n2 / (1.0 + form.n2);
    for (int d = -kmax; d <= kmax; ++d) {
        const int n = SectorLayout::size(work_max_, d);
        const int g = SectorLayout::grid_size(kmax, d);
        const Eigen::MatrixXd sz = tms_sector_block(form.zeta, d, n);
        const Eigen::MatrixXcd& z = receiver_cols_[d + kmax];
        Eigen::MatrixXd amp2(n, g);
        amp2 = (sz * z.real()).array().square() + (sz * z.imag()).array().square();
        Eigen::VectorXd w(n);
        for (int j = 0; j < n; ++j) {
            const int s = SectorLayout::k_of(d, j), t = SectorLayout::m_of(d, j);
            w(j) = std::pow(q1, s) * (1.0 - q1) * std::pow(q2, t) * (1.0 - q2);
        }
        const Eigen::VectorXd v = amp2.transpose() * w;
        for (int j = 0; j < g; ++j) p(SectorLayout::k_of(d, j), SectorLayout::m_of(d, j)) = v(j);
    }
    return p;
}

const Eigen::MatrixXd& LikelihoodModel::probs(double theta) {
    const std::int64_t key = std::llround(theta * 1e9);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    ++evaluations_;
    return cache_.emplace(key, compute(quantize(theta))).first->second;
}

PmfTable LikelihoodModel::table(double theta) {
    PmfTable t;
    t.probs = probs(theta);
    t.theta = quantize(theta);
    t.config = config_;
    finish_table(t);
    return t;
}

}  // namespace tsense
