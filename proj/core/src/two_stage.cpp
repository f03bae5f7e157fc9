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

#include "tsense/two_stage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "tsense/error.hpp"
#include "tsense/rng.hpp"

namespace tsense {

namespace {
constexpr std::uint64_t kStreamHeterodyne = 1;
constexpr std::uint64_t kStreamCounts = 2;
constexpr double kLogFloor = 1e-300;
}  // namespace

void ThetaSpace::validate() const {
    if (!(lo > 0.0 && lo < hi && hi <= 1.0)) throw InvalidArgument("parameter space must satisfy 0 < lo < hi <= 1");
}

void RunConfig::validate() const {
    channel.validate();
    cutoff.validate();
    theta_space.validate();
    if (!(schedule_q > 0.0 && schedule_q < 1.0)) throw InvalidArgument("schedule_q must lie in (0, 1)");
    if (n_total < 3) throw InvalidArgument("n_total too small");
    if (refine_count() < 1) throw InvalidArgument("n_total must exceed the preliminary batch 2 f(n)");
}

const char* to_string(TrialStatus s) {
    switch (s) {
        case TrialStatus::Ok: return "ok";
        case TrialStatus::ExistenceFailure: return "existence_failure";
        case TrialStatus::CutoffFailure: return "cutoff_failure";
        case TrialStatus::Failed: return "failed";
    }
    return "failed";
}

TrialStatus trial_status_from_string(const std::string& s) {
    if (s == "ok") return TrialStatus::Ok;
    if (s == "existence_failure") return TrialStatus::ExistenceFailure;
    if (s == "cutoff_failure") return TrialStatus::CutoffFailure;
    if (s == "failed") return TrialStatus::Failed;
    throw ConfigError("unknown trial status '" + s + "'");
}

std::vector<std::pair<int, int>> sample_pnr(const PmfTable& pmf, long count, std::uint64_t seed) {
    if (count < 0) throw InvalidArgument("sample_pnr: negative count");
    std::vector<std::pair<int, int>> out;
    if (count == 0) return out;
    const int rows = static_cast<int>(pmf.probs.rows()), cols = static_cast<int>(pmf.probs.cols());
    std::vector<double> cdf(static_cast<std::size_t>(rows) * cols);
    double acc = 0.0;
    int best = 0;
    double best_p = -1.0;
    for (int k = 0; k < rows; ++k) {
        for (int m = 0; m < cols; ++m) {
            const double p = std::max(0.0, pmf.probs(k, m));
            const int flat = k * cols + m;
            acc += p;
            cdf[flat] = acc;
            if (p > best_p) {
                best_p = p;
                best = flat;
            }
        }
    }
    std::mt19937_64 rng(seed);
    out.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
        const double u = unit_interval(rng());
        int flat;
        if (u >= acc) {
            flat = best;
        } else {
            flat = static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        }
        out.emplace_back(flat / cols, flat % cols);
    }
    return out;
}

CountHistogram histogram(const std::vector<std::pair<int, int>>& data, int per_mode_max) {
    CountHistogram h = CountHistogram::Zero(per_mode_max + 1, per_mode_max + 1);
    for (const auto& [k, m] : data) {
        if (k < 0 || m < 0 || k > per_mode_max || m > per_mode_max)
            throw InvalidArgument("photon count outside the outcome grid");
        h(k, m) += 1.0;
    }
    return h;
}

double log_likelihood(const CountHistogram& counts, const Eigen::MatrixXd& probs) {
    if (counts.rows() != probs.rows() || counts.cols() != probs.cols())
        throw DimensionMismatch("log_likelihood: histogram and p.m.f. shapes differ");
    double ll = 0.0;
    for (Eigen::Index c = 0; c < counts.cols(); ++c)
        for (Eigen::Index r = 0; r < counts.rows(); ++r)
            if (counts(r, c) > 0.0) ll += counts(r, c) * std::log(std::max(probs(r, c), kLogFloor));
    return ll;
}

double log_likelihood(const std::vector<std::pair<int, int>>& data, const Eigen::MatrixXd& probs) {
    double ll = 0.0;
    for (const auto& [k, m] : data) ll += std::log(std::max(probs(k, m), kLogFloor));
    return ll;
}

RefineResult refine_mle_detailed(const CountHistogram& counts, LikelihoodModel& model, const ThetaSpace& space) {
    space.validate();
    if (counts.sum() <= 0.0) throw InvalidArgument("refine_mle needs at least one outcome");
    const int before = model.evaluations();
    auto ll = [&](double t) { return log_likelihood(counts, model.probs(t)); };

    constexpr int grid = 33;
    const double step = (space.hi - space.lo) / (grid - 1);
    int best = 0;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i) {
        const double t = i == grid - 1 ? space.hi : space.lo + step * i;
        const double v = ll(t);
        if (v > best_ll) {
            best_ll = v;
            best = i;
        }
    }
    double a = space.lo + step * std::max(best - 1, 0);
    double c = best + 1 >= grid - 1 ? space.hi : space.lo + step * (best + 1);
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = c - invphi * (c - a), x2 = a + invphi * (c - a);
    double f1 = ll(x1), f2 = ll(x2);
    while (c - a > 1e-7) {
        if (f1 >= f2) {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - invphi * (c - a);
            f1 = ll(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (c - a);
            f2 = ll(x2);
        }
    }
    RefineResult r;
    r.theta = f1 >= f2 ? x1 : x2;
    r.loglik = std::max(f1, f2);
    // The grid point itself may beat the interior (endpoint maxima).
    const double t_best = best == grid - 1 ? space.hi : space.lo + step * best;
    if (best_ll > r.loglik) {
        r.theta = t_best;
        r.loglik = best_ll;
    }
    // Endpoint check: golden-section never evaluates the bracket ends.
    for (double edge : {space.lo, space.hi}) {
        if (std::abs(r.theta - edge) < 2e-7) {
            const double v = ll(edge);
            if (v >= r.loglik) {
                r.theta = edge;
                r.loglik = v;
            }
        }
    }
    r.boundary = std::abs(r.theta - space.lo) < 1e-6 || std::abs(r.theta - space.hi) < 1e-6;
    r.evaluations = model.evaluations() - before;
    return r;
}

double refine_mle(const std::vector<std::pair<int, int>>& data, const ReceiverConfig& config,
                  const ChannelParams& channel_template, const ThetaSpace& space) {
    if (data.empty()) throw InvalidArgument("refine_mle needs at least one outcome");
    LikelihoodModel model(config, channel_template);
    return refine_mle_detailed(histogram(data, config.cutoff.per_mode_max), model, space).theta;
}

namespace {

// Fills `rec` stage by stage so a failure leaves the completed stages behind.
void run_trial_into(const RunConfig& cfg, TrialRecord& rec) {
    cfg.validate();
    rec.n_total = cfg.n_total;
    rec.f_n = cfg.f_n();
    rec.n_refine = cfg.refine_count();
    rec.seed = cfg.seed;

    const auto samples = sample_heterodyne(cfg.channel, cfg.heterodyne_count(), derive_seed(cfg.seed, kStreamHeterodyne));
    rec.prelim = mle_preliminary(samples, cfg.channel.n_s);
    const PreliminaryEstimate clamped = clamp_to_gamma_space(rec.prelim, cfg.theta_space.lo);
    rec.theta_p_clamped = std::min(clamped.theta_p, cfg.theta_space.hi);

    const OmegaSelection sel =
        select_omega_detailed(rec.theta_p_clamped, rec.prelim.gamma_hat, cfg.channel, cfg.cutoff);
    rec.omega = sel.omega.r();
    rec.cfi_ratio = sel.ratio;
    rec.omega_certified = sel.certified;
    rec.omega_evals = sel.evaluations;

    // A poor phase estimate squeezes the true state into higher photon
    // numbers than the model state, so the outcome grid grows until the
    // counts distribution fits inside it.
    FockCutoff grid = cfg.cutoff;
    const int grid_limit = 2 * cfg.cutoff.per_mode_max;
    for (;;) {
        const ReceiverConfig receiver{sel.omega, rec.prelim.gamma_hat, grid};
        LikelihoodModel truth(receiver, cfg.channel);
        rec.cutoff_used = grid.per_mode_max;
        PmfTable table;
        try {
            table = truth.table(cfg.channel.theta);
        } catch (const CutoffTooSmall&) {
            if (grid.per_mode_max >= grid_limit) throw;
            grid.per_mode_max = std::min(grid_limit, grid.per_mode_max + 5);
            continue;
        }
        rec.tail_mass = table.tail_mass;
        rec.work_max = truth.work_max();
        const auto counts =
            histogram(sample_pnr(table, rec.n_refine, derive_seed(cfg.seed, kStreamCounts)), grid.per_mode_max);

        RefineResult fit;
        if (cfg.phase_model == LikelihoodPhase::True) {
            fit = refine_mle_detailed(counts, truth, cfg.theta_space);
        } else {
            LikelihoodModel plug(receiver, cfg.channel.with_gamma(rec.prelim.gamma_hat), truth.work_max());
            fit = refine_mle_detailed(counts, plug, cfg.theta_space);
        }
        rec.theta_r = fit.theta;
        rec.loglik_at_max = fit.loglik;
        rec.boundary = fit.boundary;
        rec.mle_evals = fit.evaluations;
        return;
    }
}

}  // namespace

TrialRecord run_trial(const RunConfig& cfg) {
    TrialRecord rec;
    run_trial_into(cfg, rec);
    return rec;
}

TrialRecord run_trial_guarded(const RunConfig& cfg) {
    TrialRecord rec;
    try {
        run_trial_into(cfg, rec);
    } catch (const ExistenceFailure& e) {
        rec.status = TrialStatus::ExistenceFailure;
        rec.message = e.what();
    } catch (const CutoffTooSmall& e) {
        rec.status = TrialStatus::CutoffFailure;
        rec.message = e.what();
    } catch (const Error& e) {
        rec.status = TrialStatus::Failed;
        rec.message = e.what();
    }
    return rec;
}

}  // namespace tsense
