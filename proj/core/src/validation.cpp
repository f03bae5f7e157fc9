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

#include "tsense/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>

#include <Eigen/Sparse>

#include "tsense/error.hpp"
#include "tsense/receiver.hpp"

namespace tsense {

namespace {

using Sparse = Eigen::SparseMatrix<cplx>;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// Largest |A(i,j) - B(i,j)| over kets with k + m <= K/2 on both sides.
double inner_gap(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, int per_mode_max) {
    const int dpm = per_mode_max + 1;
    double worst = 0.0;
    for (int i = 0; i < a.rows(); ++i) {
        if (i / dpm + i % dpm > per_mode_max / 2) continue;
        for (int j = 0; j < a.cols(); ++j) {
            if (j / dpm + j % dpm > per_mode_max / 2) continue;
            worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
        }
    }
    return worst;
}

CheckResult unitarity(const ValidationOptions& o) {
    double worst = 0.0;
    for (double r : {0.1, 0.2, -0.2}) {
        const auto s = tms_matrix_elements(SqueezeParams(r), o.cutoff).entries();
        const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(s.rows(), s.cols());
        worst = std::max(worst, inner_gap(s.adjoint() * s, eye, o.cutoff.per_mode_max));
    }
    return {"unitarity", worst <= 1e-8, "max |S^dag S - 1| on inner block = " + num(worst)};
}

CheckResult difference_conservation(const ValidationOptions& o) {
    const auto s = tms_matrix_elements(SqueezeParams(0.2), o.cutoff);
    const int dpm = o.cutoff.dim_per_mode();
    double worst = 0.0;
    for (int i = 0; i < s.dim(); ++i)
        for (int j = 0; j < s.dim(); ++j)
            if (i / dpm - i % dpm != j / dpm - j % dpm) worst = std::max(worst, std::abs(s.entries()(i, j)));
    return {"difference conservation", worst == 0.0, "largest cross-sector entry = " + num(worst)};
}

CheckResult composition(const ValidationOptions& o) {
    const auto a = tms_matrix_elements(SqueezeParams(0.12), o.cutoff).entries();
    const auto b = tms_matrix_elements(SqueezeParams(0.08), o.cutoff).entries();
    const auto ab = tms_matrix_elements(SqueezeParams(0.2), o.cutoff).entries();
    const double worst = inner_gap(a * b, ab, o.cutoff.per_mode_max);
    return {"composition", worst <= 1e-8, "max |S(a)S(b) - S(a+b)| = " + num(worst)};
}

CheckResult williamson(const ValidationOptions& o) {
    const GaussianState g = output_covariance(o.channel);
    const SqueezedThermalForm f = williamson_two_mode(g);
    const double res = (reconstruct_covariance(f).cov - g.cov).cwiseAbs().maxCoeff();
    return {"normal form round trip", res < 1e-9, "covariance residual = " + num(res)};
}

ReceiverConfig truth_receiver(const ValidationOptions& o) {
    ReceiverConfig rc;
    rc.gamma_hat = o.channel.gamma;
    rc.cutoff = o.cutoff;
    rc.omega = select_omega(o.channel.theta, o.channel.gamma, o.channel, o.cutoff);
    return rc;
}

CheckResult normalization(const ValidationOptions& o) {
    const PmfTable t = pmf_tms_pnr(o.channel.theta, truth_receiver(o), o.channel);
    const double deficit = std::abs(1.0 - t.probs.sum());
    return {"normalization", deficit < o.cutoff.tail_tol && t.probs.minCoeff() >= 0.0,
            "1 - sum p = " + num(deficit) + ", min p = " + num(t.probs.minCoeff())};
}

CheckResult route_agreement(const ValidationOptions& o) {
    ReceiverConfig rc = truth_receiver(o);
    testing_hooks::set_sandwich_sign_flip(o.inject_sign_flip);
    struct Reset {
        ~Reset() { testing_hooks::set_sandwich_sign_flip(false); }
    } reset;
    double worst = 0.0;
    for (double err : {0.0, 0.25}) {
        rc.gamma_hat = wrap_phase(o.channel.gamma + err);
        worst = std::max(worst, pmf_route_gap(o.channel.theta, rc, o.channel));
    }
    return {"route agreement", worst <= 1e-8, "max entry gap between routes = " + num(worst)};
}

CheckResult moments(const ValidationOptions& o) {
    FockCutoff fine{o.cutoff.per_mode_max + 10, std::min(o.cutoff.tail_tol, 1e-10)};
    const SqueezedThermalForm f = williamson_two_mode(output_covariance(o.channel));
    const auto sigma = density_matrix_fock(f, fine).entries();
    const auto [a_op, ad_op] = ladder_ops(fine, Mode::R);
    const Sparse a = a_op.entries().sparseView();
    const Sparse ad = ad_op.entries().sparseView();
    auto tr = [&](const Sparse& op) { return (op * sigma).trace(); };

    const double n = f.mu() * f.mu() * f.n1 + f.nu() * f.nu() * (1.0 + f.n2);
    const Sparse n_op = ad * a;
    const Sparse np1_op = a * ad;
    struct Row {
        const char* label;
        cplx numeric;
        double closed;
    };
    const Row rows[] = {
        {"<a^dag a>", tr(n_op), n},
        {"<a a^dag>", tr(np1_op), n + 1.0},
        {"<a^dag a^dag>", tr(Sparse(ad * ad)), 0.0},
        {"<a a>", tr(Sparse(a * a)), 0.0},
        {"<a a^dag a a^dag>", tr(Sparse(np1_op * np1_op)), 1.0 + 3.0 * n + 2.0 * n * n},
        {"<a^dag a a^dag a>", tr(Sparse(n_op * n_op)), n + 2.0 * n * n},
    };
    double worst = 0.0;
    std::string where;
    for (const Row& r : rows) {
        const double err = std::abs(r.numeric - r.closed) / std::max(1.0, std::abs(r.closed));
        if (err >= worst) {
            worst = err;
            where = r.label;
        }
    }
    return {"moment identities", worst <= 1e-6, "worst relative error " + num(worst) + " at " + where};
}

CheckResult lindblad_vs_fd(const ValidationOptions& o) {
    const ReceiverConfig rc = truth_receiver(o);
    const double th = o.channel.theta;
    const Eigen::MatrixXd dp = pmf_theta_derivative(th, rc, o.channel);
    auto central = [&](double h) {
        return Eigen::MatrixXd((pmf_tms_pnr(th + h, rc, o.channel).probs - pmf_tms_pnr(th - h, rc, o.channel).probs) /
                               (2.0 * h));
    };
    const double h = 2e-3 * std::max(th, 0.1);
    const Eigen::MatrixXd fd = (4.0 * central(h / 2) - central(h)) / 3.0;
    double worst = 0.0;
    for (int i = 0; i < dp.rows(); ++i)
        for (int j = 0; j < dp.cols(); ++j)
            if (std::abs(dp(i, j)) > 1e-10) worst = std::max(worst, std::abs(fd(i, j) - dp(i, j)) / std::abs(dp(i, j)));
    const double total = std::abs(dp.sum());
    return {"loss derivative", worst <= 1e-4 && total <= 1e-8,
            "max relative gap to finite difference = " + num(worst) + ", |sum dp| = " + num(total)};
}

CheckResult lower_bound(const ValidationOptions& o) {
    ReceiverConfig rc = truth_receiver(o);
    const SqueezedThermalForm f = williamson_two_mode(output_covariance(o.channel));
    double worst = 1.0;
    bool ok = true;
    std::string extra;
    for (double err : {0.0, 0.2}) {
        rc.gamma_hat = wrap_phase(o.channel.gamma + err);
        const auto rep = pmf_lower_bound_check(pmf_tms_pnr(o.channel.theta, rc, o.channel), f, rc);
        ok = ok && rep.ok;
        worst = std::min(worst, rep.worst_margin);
        extra = ", l2 = " + num(rep.l2) + ", l3 = " + num(rep.l3);
    }
    return {"p.m.f. lower bound", ok, "worst margin = " + num(worst) + extra};
}

CheckResult optimality(const ValidationOptions& o) {
    const auto sel = select_omega_detailed(o.channel.theta, o.channel.gamma, o.channel, o.cutoff);
    const bool ok = sel.ratio >= 0.99 && sel.ratio <= 1.0001;
    return {"CFI / QFI at truth", ok,
            "omega = " + num(sel.omega.r()) + ", CFI / J = " + num(sel.ratio) + " (J = " + num(sel.qfi) + ")"};
}

}  // namespace

std::vector<CheckResult> run_validation_suite(const ValidationOptions& opts) {
    const std::pair<const char*, std::function<CheckResult(const ValidationOptions&)>> checks[] = {
        {"unitarity", unitarity},
        {"difference conservation", difference_conservation},
        {"composition", composition},
        {"normal form round trip", williamson},
        {"normalization", normalization},
        {"route agreement", route_agreement},
        {"moment identities", moments},
        {"loss derivative", lindblad_vs_fd},
        {"p.m.f. lower bound", lower_bound},
        {"CFI / QFI at truth", optimality},
    };
    std::vector<CheckResult> out;
    for (const auto& [name, fn] : checks) {
        try {
            out.push_back(fn(opts));
        } catch (const CutoffTooSmall& e) {
            out.push_back({name, false, std::string("cutoff too small: ") + e.what()});
        } catch (const RouteDisagreement& e) {
            out.push_back({name, false, std::string("route disagreement: ") + e.what()});
        } catch (const std::exception& e) {
            out.push_back({name, false, e.what()});
        }
    }
    return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
    return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

void print_report(std::ostream& out, const std::vector<CheckResult>& results) {
    for (const auto& r : results) out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
}

}  // namespace tsense
