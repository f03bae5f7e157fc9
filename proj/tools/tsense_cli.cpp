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

// tsense: validate the numerics, run Monte Carlo sweeps, map the receiver CFI.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tsense/error.hpp"
#include "tsense/experiment.hpp"
#include "tsense/validation.hpp"

namespace {

enum Exit { kOk = 0, kValidation = 2, kExistence = 3, kIo = 4 };

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out_dir;
};

tsense::ExperimentConfig resolve(const std::string& path, const Overrides& o) {
    tsense::ExperimentConfig cfg = tsense::load_config(path);
    if (o.seed) cfg.seed = *o.seed;
    if (o.workers) cfg.workers = *o.workers;
    if (o.out_dir) cfg.out_dir = *o.out_dir;
    cfg.validate();
    return cfg;
}

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "override the base seed");
    cmd->add_option("--workers", o.workers, "worker threads (0 = available cores)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--out-dir", o.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage transmittance estimation: validation, sweeps and CFI maps"};
    app.require_subcommand(1);

    auto* validate = app.add_subcommand("validate", "run the fast invariant suite");
    tsense::ValidationOptions vopts;
    std::string vconfig;
    validate->add_option("--cutoff", vopts.cutoff.per_mode_max, "photon-number cutoff per mode");
    validate->add_option("--config", vconfig, "take the channel from this config");
    validate->add_flag("--inject-sign-flip", vopts.inject_sign_flip)->group("");

    Overrides run_over;
    std::string run_config;
    std::string from_archive;
    auto* run = app.add_subcommand("run", "execute a Monte Carlo sweep");
    run->add_option("config", run_config, "experiment config (JSON)")->required();
    run->add_option("--from-archive", from_archive, "rebuild summaries from a trial archive without simulating");
    add_overrides(run, run_over);

    Overrides map_over;
    std::string map_config;
    auto* fimap = app.add_subcommand("fi-map", "CFI over receiver squeeze and phase error");
    fimap->add_option("config", map_config, "experiment config (JSON)")->required();
    add_overrides(fimap, map_over);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (validate->parsed()) {
            if (!vconfig.empty()) vopts.channel = tsense::load_config(vconfig).channel;
            const auto results = tsense::run_validation_suite(vopts);
            tsense::print_report(std::cout, results);
            return tsense::all_passed(results) ? kOk : kValidation;
        }
        if (run->parsed()) {
            const auto cfg = resolve(run_config, run_over);
            const auto out = tsense::execute_run(cfg, from_archive, std::cerr);
            std::cout << out.summary.string() << '\n';
            return kOk;
        }
        if (fimap->parsed()) {
            const auto cfg = resolve(map_config, map_over);
            const auto out = tsense::execute_fi_map(cfg, std::cerr);
            std::cout << out.matrix.string() << '\n';
            return kOk;
        }
    } catch (const tsense::ExistenceFailure& e) {
        std::cerr << "existence failure: " << e.what() << '\n';
        return kExistence;
    } catch (const tsense::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    }
    return kOk;
}
