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
 * Experiment configuration documents, trial archives, summary tables and run
 * manifests, plus the run / fi-map drivers used by the command-line tool.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "tsense/harness.hpp"

namespace tsense {

struct FiMapGrid {
    double omega_lo = -2.0;
    double omega_hi = 2.0;
    int omega_points = 41;
    double gamma_err_lo = -0.5;
    double gamma_err_hi = 0.5;
    int gamma_err_points = 21;

    bool operator==(const FiMapGrid&) const = default;
};

struct ExperimentConfig {
    ChannelParams channel{};
    double schedule_q = 0.5;
    FockCutoff cutoff{20, 1e-8};
    ThetaSpace theta_space{};
    LikelihoodPhase phase_model = LikelihoodPhase::True;
    std::vector<long> n_list{250, 1000, 4000};
    int trials_per_n = 200;
    std::set<Metric> metrics{Metric::Consistency, Metric::Normality, Metric::Mse};
    int min_normality_trials = 500;
    FiMapGrid fi_map{};
    std::uint64_t seed = 1;
    int workers = 0;  ///< 0 = available cores
    std::string out_dir = "tsense-out";

    RunConfig run_config() const;
    SweepSpec sweep_spec() const;
    void validate() const;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses a JSON document; unknown keys and malformed values throw ConfigError.
ExperimentConfig parse_config(const std::string& text);
std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a over the canonical serialisation, excluding execution-only
/// keys (workers, out_dir). Sixteen hex digits.
std::string config_hash(const ExperimentConfig& cfg);

std::string archive_line(const TrialRecord& r);
TrialRecord parse_archive_line(const std::string& line);

void write_archive(const std::filesystem::path& path, const ExperimentConfig& cfg,
                   const std::vector<TrialRecord>& records);
/// Reads records back; `hash_out`, when given, receives the header's hash.
std::vector<TrialRecord> read_archive(const std::filesystem::path& path, std::string* hash_out = nullptr);

void write_summary_csv(const std::filesystem::path& path, const ExperimentConfig& cfg,
                       const std::vector<SummaryRow>& rows);
void write_fi_map_csv(const std::filesystem::path& path, const ExperimentConfig& cfg, const FiLandscape& map);
void write_manifest(const std::filesystem::path& path, const ExperimentConfig& cfg, const std::string& command,
                    const std::vector<std::string>& files);

struct RunOutputs {
    std::filesystem::path archive;
    std::filesystem::path summary;
    std::filesystem::path manifest;
    std::vector<SummaryRow> rows;
    std::vector<TrialRecord> records;
};

/// Simulates the sweep (or reloads `from_archive`) and writes archive,
/// summary and manifest into cfg.out_dir.
RunOutputs execute_run(const ExperimentConfig& cfg, const std::filesystem::path& from_archive, std::ostream& log);

struct FiMapOutputs {
    std::filesystem::path matrix;
    std::filesystem::path manifest;
    FiLandscape map;
};

FiMapOutputs execute_fi_map(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace tsense
