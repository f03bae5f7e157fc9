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

#include "tsense/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "tsense/error.hpp"
#include "tsense/rng.hpp"
#include "tsense/stats.hpp"

namespace tsense {

void SweepSpec::validate() const {
    base.channel.validate();
    if (n_list.empty()) throw InvalidArgument("sweep needs at least one sample size");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1]) throw InvalidArgument("n_list must be strictly increasing");
    if (trials_per_n < 30) throw InvalidArgument("trials_per_n must be at least 30");
    for (long n : n_list) {
        RunConfig c = base;
        c.n_total = n;
        c.validate();
    }
}

std::uint64_t trial_seed(std::uint64_t base, long n, int trial) {
    return derive_seed(derive_seed(base, static_cast<std::uint64_t>(n)), static_cast<std::uint64_t>(trial));
}

std::vector<TrialRecord> run_sweep(const SweepSpec& spec, int workers, const ProgressFn& progress) {
    spec.validate();
    const long per = spec.trials_per_n;
    const long total = per * static_cast<long>(spec.n_list.size());
    std::vector<TrialRecord> out(static_cast<std::size_t>(total));
    std::atomic<long> next{0};
    std::atomic<long> done{0};
    std::mutex progress_mu;
    auto work = [&] {
        for (;;) {
            const long job = next.fetch_add(1);
            if (job >= total) return;
            RunConfig cfg = spec.base;
            cfg.n_total = spec.n_list[static_cast<std::size_t>(job / per)];
            cfg.seed = trial_seed(spec.base.seed, cfg.n_total, static_cast<int>(job % per));
            out[static_cast<std::size_t>(job)] = run_trial_guarded(cfg);
            const long d = done.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard<std::mutex> lock(progress_mu);
                progress(d, total);
            }
        }
    };
    workers = std::max(1, workers);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return out;
}

std::vector<TrialRecord> records_at(const std::vector<TrialRecord>& records, long n) {
    std::vector<TrialRecord> out;
    for (const auto& r : records)
        if (r.n_total == n) out.push_back(r);
    return out;
}

ConsistencyTable consistency_from_records(const std::vector<TrialRecord>& records, const std::vector<long>& n_list,
                                          double theta_t) {
    ConsistencyTable table;
    std::vector<double> ns, rms;
    for (long n : n_list) {
        ConsistencyRow row;
        row.n = n;
        std::vector<double> refine, prelim;
        for (const auto& r : records) {
            if (r.n_total != n) continue;
            ++row.trials;
            row.f_n = r.f_n;
            switch (r.status) {
                case TrialStatus::Ok: ++row.ok; break;
                case TrialStatus::ExistenceFailure: ++row.existence_failures; break;
                case TrialStatus::CutoffFailure: ++row.cutoff_failures; break;
                case TrialStatus::Failed: ++row.other_failures; break;
            }
            if (!r.ok()) continue;
            if (r.boundary) ++row.boundary;
            refine.push_back(r.theta_r);
            prelim.push_back(r.prelim.theta_p);
        }
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.rms_refine = refine.empty() ? nan : stats::rms_error(refine, theta_t);
        row.rms_prelim = prelim.empty() ? nan : stats::rms_error(prelim, theta_t);
        if (!refine.empty()) {
            ns.push_back(static_cast<double>(n));
            rms.push_back(row.rms_refine);
        }
        table.rows.push_back(row);
    }
    table.spearman = ns.size() >= 2 ? stats::spearman(ns, rms) : 0.0;
    return table;
}

ConsistencyTable consistency_sweep(const SweepSpec& spec, int workers) {
    return consistency_from_records(run_sweep(spec, workers), spec.n_list, spec.base.channel.theta);
}

NormalityReport normality_from_records(const std::vector<TrialRecord>& records, long n, double theta_t, double qfi,
                                       int min_trials) {
    if (!(qfi > 0.0)) throw InvalidArgument("normality target needs a positive QFI");
    NormalityReport rep;
    rep.n = n;
    rep.target_var = 1.0 / qfi;
    for (const auto& r : records) {
        if (r.n_total != n) continue;
        if (!r.ok() || r.boundary) {
            ++rep.excluded;
            continue;
        }
        rep.z_samples.push_back(std::sqrt(static_cast<double>(r.n_refine)) * (r.theta_r - theta_t));
    }
    if (static_cast<int>(rep.z_samples.size()) < std::max(min_trials, 2))
        throw InsufficientTrials("normality test at n = " + std::to_string(n) + " has " +
                                 std::to_string(rep.z_samples.size()) + " interior trials, needs " +
                                 std::to_string(min_trials));
    const double sd = std::sqrt(rep.target_var);
    rep.ks_stat = stats::ks_statistic(rep.z_samples, [sd](double z) { return stats::normal_cdf(z / sd); });
    const double var = stats::variance(rep.z_samples);
    rep.var_ratio = var / rep.target_var;
    rep.z_mean = stats::mean(rep.z_samples);
    rep.z_mean_se = std::sqrt(var / static_cast<double>(rep.z_samples.size()));
    return rep;
}

std::vector<NormalityReport> normality_test(const SweepSpec& spec, int workers) {
    const auto records = run_sweep(spec, workers);
    const double j = qfi_transmittance(spec.base.channel, spec.base.cutoff).value;
    std::vector<NormalityReport> out;
    for (long n : spec.n_list) out.push_back(normality_from_records(records, n, spec.base.channel.theta, j));
    return out;
}

std::vector<MseRow> mse_from_records(const std::vector<TrialRecord>& records, const std::vector<long>& n_list,
                                     double theta_t, double qfi) {
    std::vector<MseRow> out;
    for (long n : n_list) {
        std::vector<double> est;
        for (const auto& r : records)
            if (r.n_total == n && r.ok()) est.push_back(r.theta_r);
        MseRow row;
        row.n = n;
        row.qcrb_inv = 1.0 / qfi;
        const double rms = est.empty() ? std::numeric_limits<double>::quiet_NaN() : stats::rms_error(est, theta_t);
        row.n_mse = static_cast<double>(n) * rms * rms;
        out.push_back(row);
    }
    return out;
}

std::vector<MseRow> mse_vs_qcrb_curve(const SweepSpec& spec, int workers) {
    const auto records = run_sweep(spec, workers);
    const double j = qfi_transmittance(spec.base.channel, spec.base.cutoff).value;
    return mse_from_records(records, spec.n_list, spec.base.channel.theta, j);
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records, const std::vector<long>& n_list,
                                  double theta_t, double qfi, int min_normality_trials) {
    const ConsistencyTable cons = consistency_from_records(records, n_list, theta_t);
    const auto mse = mse_from_records(records, n_list, theta_t, qfi);
    std::vector<SummaryRow> out;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        SummaryRow row;
        row.n = n_list[i];
        row.f_n = cons.rows[i].f_n;
        row.rms_prelim = cons.rows[i].rms_prelim;
        row.rms_refine = cons.rows[i].rms_refine;
        row.n_mse = mse[i].n_mse;
        row.qcrb_inv = mse[i].qcrb_inv;
        try {
            const auto rep = normality_from_records(records, n_list[i], theta_t, qfi, min_normality_trials);
            row.ks_stat = rep.ks_stat;
            row.var_ratio = rep.var_ratio;
        } catch (const InsufficientTrials&) {
            row.ks_stat = row.var_ratio = std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(row);
    }
    return out;
}

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw InvalidArgument("linspace needs count >= 1");
    std::vector<double> v(static_cast<std::size_t>(count));
    if (count == 1) {
        v[0] = lo;
        return v;
    }
    for (int i = 0; i < count; ++i) v[i] = i == count - 1 ? hi : lo + (hi - lo) * i / (count - 1);
    return v;
}

FiLandscape fi_landscape(const ChannelParams& channel, const std::vector<double>& omega_grid,
                         const std::vector<double>& gamma_err_grid, const FockCutoff& cutoff) {
    if (omega_grid.empty() || gamma_err_grid.empty()) throw InvalidArgument("fi_landscape needs non-empty grids");
    FiLandscape out;
    out.omega_grid = omega_grid;
    out.gamma_err_grid = gamma_err_grid;
    const int rows = static_cast<int>(gamma_err_grid.size()), cols = static_cast<int>(omega_grid.size());
    out.cfi.resize(rows, cols);
    for (int g = 0; g < rows; ++g) {
        const ReceiverScan scan(channel, wrap_phase(channel.gamma + gamma_err_grid[g]), cutoff);
        if (g == 0) out.qfi = scan.qfi();
        for (int w = 0; w < cols; ++w) out.cfi(g, w) = scan.evaluate(omega_grid[w]).cfi;
    }
    out.all_finite = out.cfi.allFinite();
    Eigen::Index gi = 0, wi = 0;
    out.max_cfi = out.cfi.maxCoeff(&gi, &wi);
    out.arg_gamma = static_cast<int>(gi);
    out.arg_omega = static_cast<int>(wi);
    out.max_ratio = out.max_cfi / out.qfi;
    if (cols > 1)
        out.max_step_omega =
            (out.cfi.rightCols(cols - 1) - out.cfi.leftCols(cols - 1)).cwiseAbs().maxCoeff() / out.qfi;
    if (rows > 1)
        out.max_step_gamma =
            (out.cfi.bottomRows(rows - 1) - out.cfi.topRows(rows - 1)).cwiseAbs().maxCoeff() / out.qfi;
    return out;
}

}  // namespace tsense
