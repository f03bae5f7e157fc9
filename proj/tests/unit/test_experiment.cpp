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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tsense/error.hpp"
#include "tsense/experiment.hpp"

using namespace tsense;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("tsense_test_" + name);
    fs::remove_all(p);
    return p;
}

ExperimentConfig small_config(const fs::path& out) {
    ExperimentConfig c;
    c.channel = ChannelParams{0.9, 0.7, 0.3, 0.4};
    c.n_list = {250, 1000};
    c.trials_per_n = 30;
    c.workers = 1;
    c.out_dir = out.string();
    return c;
}

}  // namespace

TEST(Config, RoundTripsLosslessly) {
    ExperimentConfig c;
    c.channel = ChannelParams{0.1234567890123, -0.3, 1.0 / 3.0, 0.4};
    c.phase_model = LikelihoodPhase::PlugIn;
    c.metrics = {Metric::Mse};
    c.seed = 18446744073709551615ULL;
    c.fi_map.omega_points = 7;
    c.out_dir = "somewhere/else";
    const ExperimentConfig back = parse_config(serialize_config(c));
    EXPECT_EQ(back, c);
    EXPECT_EQ(serialize_config(back), serialize_config(c));
}

TEST(Config, MissingKeysTakeDefaults) {
    const auto c = parse_config(R"({"seed": 3})");
    EXPECT_EQ(c.seed, 3u);
    EXPECT_EQ(c.n_list, (std::vector<long>{250, 1000, 4000}));
}

TEST(Config, UnknownKeysAreRejected) {
    EXPECT_THROW(parse_config(R"({"sede": 3})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"channel": {"theta": 0.9, "phase": 1}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"sweep": {"metrics": ["speed"]}})"), ConfigError);
}

TEST(Config, TypeAndRangeErrors) {
    EXPECT_THROW(parse_config(R"({"seed": -1})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"channel": {"theta": "high"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"channel": {"theta": 1.5}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"likelihood_phase": "guess"})"), ConfigError);
    EXPECT_THROW(parse_config("{not json"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/config.json"), IoError);
}

TEST(Config, HashIgnoresExecutionSettings) {
    ExperimentConfig a, b;
    b.workers = 7;
    b.out_dir = "x";
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.seed = 2;
    EXPECT_NE(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Archive, LineRoundTrip) {
    TrialRecord r;
    r.n_total = 4000;
    r.f_n = 64;
    r.n_refine = 3872;
    r.seed = 0xfedcba9876543210ULL;
    r.prelim = {0.91234567890123456, -0.123, 128, false};
    r.theta_p_clamped = 0.91234567890123456;
    r.omega = -0.5664;
    r.cfi_ratio = 0.9999;
    r.omega_certified = true;
    r.theta_r = 0.8999999999999999;
    r.loglik_at_max = -12345.678;
    r.cutoff_used = 25;
    r.status = TrialStatus::CutoffFailure;
    r.message = "quote \" and newline \n";
    EXPECT_EQ(parse_archive_line(archive_line(r)), r);
    EXPECT_EQ(archive_line(r).find('\n'), std::string::npos);
}

TEST(Run, WritesStampedArtifactsAndIsDeterministic) {
    const fs::path dir = scratch("run");
    const auto cfg = small_config(dir);
    std::ostringstream log;
    const auto out = execute_run(cfg, {}, log);
    ASSERT_TRUE(fs::exists(out.archive) && fs::exists(out.summary) && fs::exists(out.manifest));
    const std::string summary = slurp(out.summary);
    const std::string stamp = "# config_hash=" + config_hash(cfg) + ",seed=1";
    EXPECT_EQ(summary.rfind(stamp, 0), 0u);
    EXPECT_NE(summary.find("n,f_n,rms_prelim,rms_refine,n_mse,qcrb_inv,ks_stat,var_ratio\n"), std::string::npos);
    EXPECT_EQ(out.rows.size(), cfg.n_list.size());
    EXPECT_NE(slurp(out.archive).find(config_hash(cfg)), std::string::npos);
    EXPECT_NE(slurp(out.manifest).find(config_hash(cfg)), std::string::npos);

    const std::string archive1 = slurp(out.archive);
    const std::string summary1 = summary;
    std::ostringstream log2;
    execute_run(cfg, {}, log2);
    EXPECT_EQ(slurp(out.archive), archive1);
    EXPECT_EQ(slurp(out.summary), summary1);

    // Aggregation from the stored archive, no simulation.
    const fs::path dir2 = scratch("rerun");
    auto cfg2 = cfg;
    cfg2.out_dir = dir2.string();
    const fs::path saved = dir2.string() + "_archive.jsonl";
    fs::copy_file(out.archive, saved, fs::copy_options::overwrite_existing);
    const auto again = execute_run(cfg2, saved, log2);
    EXPECT_EQ(slurp(again.summary), summary1);
    EXPECT_EQ(again.records, out.records);

    auto other = cfg;
    other.seed = 2;
    EXPECT_THROW(execute_run(other, saved, log2), ConfigError);
}

TEST(Run, TruncatedArchiveIsRejected) {
    const fs::path dir = scratch("trunc");
    fs::create_directories(dir);
    ExperimentConfig cfg = small_config(dir);
    {
        std::ofstream out(dir / "bad.jsonl");
        out << R"({"kind":"header","config_hash":")" << config_hash(cfg) << R"(","seed":1,"version":"x","records":5})"
            << "\n";
    }
    std::ostringstream log;
    EXPECT_THROW(read_archive(dir / "bad.jsonl"), IoError);
    EXPECT_THROW(read_archive(dir / "missing.jsonl"), IoError);
}

TEST(Run, UnwritableOutputIsIoError) {
    const fs::path file = scratch("blocker");
    { std::ofstream(file) << "x"; }
    auto cfg = small_config(file / "sub");
    std::ostringstream log;
    EXPECT_THROW(execute_run(cfg, {}, log), IoError);
}

TEST(FiMap, MatrixLayoutAndBound) {
    const fs::path dir = scratch("fimap");
    ExperimentConfig cfg;
    cfg.channel = ChannelParams{0.9, 0.7, 0.3, 0.4};
    cfg.out_dir = dir.string();
    std::ostringstream log;
    const auto out = execute_fi_map(cfg, log);
    std::ifstream in(out.matrix);
    std::string line;
    int lines = 0, data = 0;
    double max_cell = 0.0;
    while (std::getline(in, line)) {
        ++lines;
        if (lines == 1) {
            EXPECT_EQ(line.rfind("# config_hash=" + config_hash(cfg), 0), 0u);
            continue;
        }
        if (lines == 2) {
            EXPECT_EQ(line.rfind("gamma_err\\omega,", 0), 0u);
            continue;
        }
        ++data;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        int cols = 0;
        while (std::getline(ss, cell, ',')) {
            max_cell = std::max(max_cell, std::stod(cell));
            ++cols;
        }
        EXPECT_EQ(cols, 41);
    }
    EXPECT_EQ(data, 21);
    EXPECT_NEAR(max_cell, out.map.max_cfi, 1e-9 * out.map.max_cfi);
    EXPECT_LE(max_cell, out.map.qfi * (1.0 + 1e-3));
    EXPECT_TRUE(fs::exists(out.manifest));
}
