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
 * Monte Carlo verification of the two-stage estimator: trial sweeps over
 * sample sizes, consistency and normality statistics, n * MSE against the
 * inverse QFI, and the CFI landscape over receiver settings.
 *
 * Every statistic here is a pure function of a list of TrialRecord values,
 * so stored archives reproduce reports exactly.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "tsense/two_stage.hpp"

namespace tsense {

enum class Metric { Consistency, Normality, Mse };

struct SweepSpec {
    std::vector<long> n_list{250, 1000, 4000};
    int trials_per_n = 200;
    RunConfig base{};
    std::set<Metric> metrics{Metric::Consistency, Metric::Normality, Metric::Mse};

    void validate() const;
};

/// Seed of trial `trial` at sample size `n`, partitioned from the base seed.
std::uint64_t trial_seed(std::uint64_t base, long n, int trial);

using ProgressFn = std::function<void(long done, long total)>;

/// Runs every (n, trial) job on `workers` threads. Records come back ordered
/// by n then trial regardless of scheduling. Receiver-stage failures become
/// records with a failure status.
std::vector<TrialRecord> run_sweep(const SweepSpec& spec, int workers, const ProgressFn& progress = {});

/// Records with n_total == n.
std::vector<TrialRecord> records_at(const std::vector<TrialRecord>& records, long n);

struct ConsistencyRow {
    long n = 0;
    long f_n = 0;
    int trials = 0;
    int ok = 0;
    int existence_failures = 0;
    int cutoff_failures = 0;
    int other_failures = 0;
    int boundary = 0;
    double rms_refine = 0.0;
    double rms_prelim = 0.0;
};

struct ConsistencyTable {
    std::vector<ConsistencyRow> rows;
    double spearman = 0.0;  ///< rank correlation of rms_refine with n
};

ConsistencyTable consistency_from_records(const std::vector<TrialRecord>& records, const std::vector<long>& n_list,
                                          double theta_t);
ConsistencyTable consistency_sweep(const SweepSpec& spec, int workers);

struct NormalityReport {
    long n = 0;
    std::vector<double> z_samples;  ///< sqrt(n')(theta_r - theta_t), interior OK trials only
    double ks_stat = 0.0;
    double target_var = 0.0;  ///< 1 / J
    double var_ratio = 0.0;   ///< Var(z) J
    double z_mean = 0.0;
    double z_mean_se = 0.0;
    int excluded = 0;  ///< boundary-flagged or failed trials
};

/// Throws InsufficientTrials when fewer than `min_trials` interior trials remain.
NormalityReport normality_from_records(const std::vector<TrialRecord>& records, long n, double theta_t, double qfi,
                                       int min_trials = 500);
std::vector<NormalityReport> normality_test(const SweepSpec& spec, int workers);

struct MseRow {
    long n = 0;
    double n_mse = 0.0;
    double qcrb_inv = 0.0;
};

std::vector<MseRow> mse_from_records(const std::vector<TrialRecord>& records, const std::vector<long>& n_list,
                                     double theta_t, double qfi);
std::vector<MseRow> mse_vs_qcrb_curve(const SweepSpec& spec, int workers);

/// One row of the csv summary. Normality columns are NaN when too few
/// interior trials are available at that n.
struct SummaryRow {
    long n = 0;
    long f_n = 0;
    double rms_prelim = 0.0;
    double rms_refine = 0.0;
    double n_mse = 0.0;
    double qcrb_inv = 0.0;
    double ks_stat = 0.0;
    double var_ratio = 0.0;
};

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records, const std::vector<long>& n_list,
                                  double theta_t, double qfi, int min_normality_trials = 500);

struct FiLandscape {
    std::vector<double> omega_grid;
    std::vector<double> gamma_err_grid;
    Eigen::MatrixXd cfi;  ///< rows: gamma error, cols: omega
    double qfi = 0.0;
    double max_cfi = 0.0;
    int arg_gamma = 0;
    int arg_omega = 0;
    double max_ratio = 0.0;
    /// Largest neighbour-to-neighbour change along each axis, relative to J.
    double max_step_omega = 0.0;
    double max_step_gamma = 0.0;
    bool all_finite = true;
};

/// CFI at the true state for receiver squeeze omega and gamma_hat = gamma_t + error.
FiLandscape fi_landscape(const ChannelParams& channel, const std::vector<double>& omega_grid,
                         const std::vector<double>& gamma_err_grid, const FockCutoff& cutoff);

std::vector<double> linspace(double lo, double hi, int count);

}  // namespace tsense
