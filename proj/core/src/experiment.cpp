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

#include "tsense/experiment.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "tsense/error.hpp"

#ifndef TSENSE_VERSION
#define TSENSE_VERSION "unknown"
#endif

namespace tsense {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kArchiveName = "trials.jsonl";
constexpr const char* kSummaryName = "summary.csv";
constexpr const char* kManifestName = "manifest.json";
constexpr const char* kFiMapName = "fi_map.csv";
constexpr const char* kFiMapManifestName = "fi_map_manifest.json";

void only_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) known = known || it.key() == k;
        if (!known) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

double get_real(const json& obj, const char* key, double fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
    return v.get<double>();
}

long get_int(const json& obj, const char* key, long fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
    return v.get<long>();
}

const char* metric_name(Metric m) {
    switch (m) {
        case Metric::Consistency: return "consistency";
        case Metric::Normality: return "normality";
        case Metric::Mse: return "mse";
    }
    return "consistency";
}

Metric metric_from(const std::string& s) {
    if (s == "consistency") return Metric::Consistency;
    if (s == "normality") return Metric::Normality;
    if (s == "mse") return Metric::Mse;
    throw ConfigError("unknown metric '" + s + "'");
}

json config_json(const ExperimentConfig& c, bool with_execution) {
    json j;
    j["channel"] = {{"theta", c.channel.theta}, {"gamma", c.channel.gamma}, {"n_s", c.channel.n_s}, {"n_b", c.channel.n_b}};
    j["schedule_q"] = c.schedule_q;
    j["cutoff"] = {{"per_mode_max", c.cutoff.per_mode_max}, {"tail_tol", c.cutoff.tail_tol}};
    j["theta_space"] = {{"lo", c.theta_space.lo}, {"hi", c.theta_space.hi}};
    j["likelihood_phase"] = c.phase_model == LikelihoodPhase::True ? "true" : "plugin";
    json metrics = json::array();
    for (Metric m : c.metrics) metrics.push_back(metric_name(m));
    j["sweep"] = {{"n_list", c.n_list}, {"trials_per_n", c.trials_per_n}, {"metrics", metrics},
                  {"min_normality_trials", c.min_normality_trials}};
    j["fi_map"] = {{"omega_lo", c.fi_map.omega_lo},         {"omega_hi", c.fi_map.omega_hi},
                   {"omega_points", c.fi_map.omega_points}, {"gamma_err_lo", c.fi_map.gamma_err_lo},
                   {"gamma_err_hi", c.fi_map.gamma_err_hi}, {"gamma_err_points", c.fi_map.gamma_err_points}};
    j["seed"] = c.seed;
    if (with_execution) {
        j["workers"] = c.workers;
        j["out_dir"] = c.out_dir;
    }
    return j;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string stamp(const ExperimentConfig& cfg) {
    return "# config_hash=" + config_hash(cfg) + ",seed=" + std::to_string(cfg.seed);
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

void close_checked(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
}

double json_real(const json& v) {
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return v.get<double>();
}

}  // namespace

RunConfig ExperimentConfig::run_config() const {
    RunConfig r;
    r.channel = channel;
    r.n_total = n_list.empty() ? 0 : n_list.back();
    r.schedule_q = schedule_q;
    r.cutoff = cutoff;
    r.seed = seed;
    r.theta_space = theta_space;
    r.phase_model = phase_model;
    return r;
}

SweepSpec ExperimentConfig::sweep_spec() const {
    SweepSpec s;
    s.n_list = n_list;
    s.trials_per_n = trials_per_n;
    s.base = run_config();
    s.metrics = metrics;
    return s;
}

void ExperimentConfig::validate() const {
    try {
        sweep_spec().validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (fi_map.omega_points < 1 || fi_map.gamma_err_points < 1) throw ConfigError("fi_map grids need >= 1 point");
    if (workers < 0) throw ConfigError("workers must be >= 0");
    if (min_normality_trials < 2) throw ConfigError("min_normality_trials must be >= 2");
    if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig c;
    try {
        only_keys(j, {"channel", "schedule_q", "cutoff", "theta_space", "likelihood_phase", "sweep", "fi_map", "seed",
                      "workers", "out_dir"},
                  "config");
        if (j.contains("channel")) {
            const json& ch = j.at("channel");
            only_keys(ch, {"theta", "gamma", "n_s", "n_b"}, "channel");
            c.channel.theta = get_real(ch, "theta", c.channel.theta, "channel");
            c.channel.gamma = get_real(ch, "gamma", c.channel.gamma, "channel");
            c.channel.n_s = get_real(ch, "n_s", c.channel.n_s, "channel");
            c.channel.n_b = get_real(ch, "n_b", c.channel.n_b, "channel");
        }
        c.schedule_q = get_real(j, "schedule_q", c.schedule_q, "config");
        if (j.contains("cutoff")) {
            const json& cu = j.at("cutoff");
            only_keys(cu, {"per_mode_max", "tail_tol"}, "cutoff");
            c.cutoff.per_mode_max = static_cast<int>(get_int(cu, "per_mode_max", c.cutoff.per_mode_max, "cutoff"));
            c.cutoff.tail_tol = get_real(cu, "tail_tol", c.cutoff.tail_tol, "cutoff");
        }
        if (j.contains("theta_space")) {
            const json& ts = j.at("theta_space");
            only_keys(ts, {"lo", "hi"}, "theta_space");
            c.theta_space.lo = get_real(ts, "lo", c.theta_space.lo, "theta_space");
            c.theta_space.hi = get_real(ts, "hi", c.theta_space.hi, "theta_space");
        }
        if (j.contains("likelihood_phase")) {
            const json& v = j.at("likelihood_phase");
            if (!v.is_string()) throw ConfigError("likelihood_phase must be a string");
            const std::string s = v.get<std::string>();
            if (s == "true") {
                c.phase_model = LikelihoodPhase::True;
            } else if (s == "plugin") {
                c.phase_model = LikelihoodPhase::PlugIn;
            } else {
                throw ConfigError("likelihood_phase must be \"true\" or \"plugin\"");
            }
        }
        if (j.contains("sweep")) {
            const json& sw = j.at("sweep");
            only_keys(sw, {"n_list", "trials_per_n", "metrics", "min_normality_trials"}, "sweep");
            if (sw.contains("n_list")) {
                const json& nl = sw.at("n_list");
                if (!nl.is_array()) throw ConfigError("sweep.n_list must be an array");
                c.n_list.clear();
                for (const auto& v : nl) {
                    if (!v.is_number_integer()) throw ConfigError("sweep.n_list entries must be integers");
                    c.n_list.push_back(v.get<long>());
                }
            }
            c.trials_per_n = static_cast<int>(get_int(sw, "trials_per_n", c.trials_per_n, "sweep"));
            c.min_normality_trials =
                static_cast<int>(get_int(sw, "min_normality_trials", c.min_normality_trials, "sweep"));
            if (sw.contains("metrics")) {
                const json& ms = sw.at("metrics");
                if (!ms.is_array()) throw ConfigError("sweep.metrics must be an array");
                c.metrics.clear();
                for (const auto& v : ms) {
                    if (!v.is_string()) throw ConfigError("sweep.metrics entries must be strings");
                    c.metrics.insert(metric_from(v.get<std::string>()));
                }
            }
        }
        if (j.contains("fi_map")) {
            const json& fm = j.at("fi_map");
            only_keys(fm, {"omega_lo", "omega_hi", "omega_points", "gamma_err_lo", "gamma_err_hi", "gamma_err_points"},
                      "fi_map");
            c.fi_map.omega_lo = get_real(fm, "omega_lo", c.fi_map.omega_lo, "fi_map");
            c.fi_map.omega_hi = get_real(fm, "omega_hi", c.fi_map.omega_hi, "fi_map");
            c.fi_map.omega_points = static_cast<int>(get_int(fm, "omega_points", c.fi_map.omega_points, "fi_map"));
            c.fi_map.gamma_err_lo = get_real(fm, "gamma_err_lo", c.fi_map.gamma_err_lo, "fi_map");
            c.fi_map.gamma_err_hi = get_real(fm, "gamma_err_hi", c.fi_map.gamma_err_hi, "fi_map");
            c.fi_map.gamma_err_points =
                static_cast<int>(get_int(fm, "gamma_err_points", c.fi_map.gamma_err_points, "fi_map"));
        }
        if (j.contains("seed")) {
            const json& v = j.at("seed");
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
                throw ConfigError("seed must be a non-negative integer");
            c.seed = v.get<std::uint64_t>();
        }
        c.workers = static_cast<int>(get_int(j, "workers", c.workers, "config"));
        if (j.contains("out_dir")) {
            if (!j.at("out_dir").is_string()) throw ConfigError("out_dir must be a string");
            c.out_dir = j.at("out_dir").get<std::string>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    c.validate();
    return c;
}

std::string serialize_config(const ExperimentConfig& cfg) { return config_json(cfg, true).dump(2) + "\n"; }

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string canon = config_json(cfg, false).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

std::string archive_line(const TrialRecord& r) {
    json j;
    j["kind"] = "trial";
    j["n_total"] = r.n_total;
    j["f_n"] = r.f_n;
    j["n_refine"] = r.n_refine;
    j["seed"] = r.seed;
    j["theta_p"] = r.prelim.theta_p;
    j["gamma_hat"] = r.prelim.gamma_hat;
    j["n_used"] = r.prelim.n_used;
    j["degenerate"] = r.prelim.degenerate;
    j["theta_p_clamped"] = r.theta_p_clamped;
    j["omega"] = r.omega;
    j["cfi_ratio"] = r.cfi_ratio;
    j["omega_certified"] = r.omega_certified;
    j["omega_evals"] = r.omega_evals;
    j["work_max"] = r.work_max;
    j["cutoff_used"] = r.cutoff_used;
    j["theta_r"] = r.theta_r;
    j["loglik_at_max"] = r.loglik_at_max;
    j["boundary"] = r.boundary;
    j["mle_evals"] = r.mle_evals;
    j["tail_mass"] = r.tail_mass;
    j["status"] = to_string(r.status);
    j["message"] = r.message;
    return j.dump();
}

TrialRecord parse_archive_line(const std::string& line) {
    try {
        const json j = json::parse(line);
        if (j.value("kind", "") != "trial") throw ConfigError("archive line is not a trial record");
        TrialRecord r;
        r.n_total = j.at("n_total").get<long>();
        r.f_n = j.at("f_n").get<long>();
        r.n_refine = j.at("n_refine").get<long>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.prelim.theta_p = json_real(j.at("theta_p"));
        r.prelim.gamma_hat = json_real(j.at("gamma_hat"));
        r.prelim.n_used = j.at("n_used").get<int>();
        r.prelim.degenerate = j.at("degenerate").get<bool>();
        r.theta_p_clamped = json_real(j.at("theta_p_clamped"));
        r.omega = json_real(j.at("omega"));
        r.cfi_ratio = json_real(j.at("cfi_ratio"));
        r.omega_certified = j.at("omega_certified").get<bool>();
        r.omega_evals = j.at("omega_evals").get<int>();
        r.work_max = j.at("work_max").get<int>();
        r.cutoff_used = j.at("cutoff_used").get<int>();
        r.theta_r = json_real(j.at("theta_r"));
        r.loglik_at_max = json_real(j.at("loglik_at_max"));
        r.boundary = j.at("boundary").get<bool>();
        r.mle_evals = j.at("mle_evals").get<int>();
        r.tail_mass = json_real(j.at("tail_mass"));
        r.status = trial_status_from_string(j.at("status").get<std::string>());
        r.message = j.at("message").get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed archive line: ") + e.what());
    }
}

void write_archive(const fs::path& path, const ExperimentConfig& cfg, const std::vector<TrialRecord>& records) {
    auto out = open_out(path);
    json head;
    head["kind"] = "header";
    head["config_hash"] = config_hash(cfg);
    head["seed"] = cfg.seed;
    head["version"] = TSENSE_VERSION;
    head["records"] = records.size();
    out << head.dump() << '\n';
    for (const auto& r : records) out << archive_line(r) << '\n';
    close_checked(out, path);
}

std::vector<TrialRecord> read_archive(const fs::path& path, std::string* hash_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read archive '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw IoError("archive '" + path.string() + "' is empty");
    std::size_t expected = 0;
    try {
        const json head = json::parse(line);
        if (head.value("kind", "") != "header") throw ConfigError("archive has no header line");
        if (hash_out) *hash_out = head.at("config_hash").get<std::string>();
        expected = head.at("records").get<std::size_t>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed archive header: ") + e.what());
    }
    std::vector<TrialRecord> out;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(parse_archive_line(line));
    if (out.size() != expected) throw IoError("archive '" + path.string() + "' is truncated");
    return out;
}

void write_summary_csv(const fs::path& path, const ExperimentConfig& cfg, const std::vector<SummaryRow>& rows) {
    auto out = open_out(path);
    out << stamp(cfg) << '\n';
    out << "n,f_n,rms_prelim,rms_refine,n_mse,qcrb_inv,ks_stat,var_ratio\n";
    for (const auto& r : rows)
        out << r.n << ',' << r.f_n << ',' << fmt(r.rms_prelim) << ',' << fmt(r.rms_refine) << ',' << fmt(r.n_mse)
            << ',' << fmt(r.qcrb_inv) << ',' << fmt(r.ks_stat) << ',' << fmt(r.var_ratio) << '\n';
    close_checked(out, path);
}

void write_fi_map_csv(const fs::path& path, const ExperimentConfig& cfg, const FiLandscape& map) {
    auto out = open_out(path);
    out << stamp(cfg) << '\n';
    out << "gamma_err\\omega";
    for (double w : map.omega_grid) out << ',' << fmt(w);
    out << '\n';
    for (std::size_t g = 0; g < map.gamma_err_grid.size(); ++g) {
        out << fmt(map.gamma_err_grid[g]);
        for (Eigen::Index w = 0; w < map.cfi.cols(); ++w) out << ',' << fmt(map.cfi(static_cast<Eigen::Index>(g), w));
        out << '\n';
    }
    close_checked(out, path);
}

void write_manifest(const fs::path& path, const ExperimentConfig& cfg, const std::string& command,
                    const std::vector<std::string>& files) {
    json m;
    m["command"] = command;
    m["config_hash"] = config_hash(cfg);
    m["seed"] = cfg.seed;
    m["version"] = TSENSE_VERSION;
    m["files"] = files;
    m["config"] = config_json(cfg, false);
    auto out = open_out(path);
    out << m.dump(2) << '\n';
    close_checked(out, path);
}

RunOutputs execute_run(const ExperimentConfig& cfg, const fs::path& from_archive, std::ostream& log) {
    cfg.validate();
    const fs::path dir(cfg.out_dir);
    ensure_dir(dir);
    RunOutputs res;
    res.archive = dir / kArchiveName;
    res.summary = dir / kSummaryName;
    res.manifest = dir / kManifestName;

    if (!from_archive.empty()) {
        std::string hash;
        res.records = read_archive(from_archive, &hash);
        if (hash != config_hash(cfg))
            throw ConfigError("archive was produced by a different configuration (hash " + hash + ")");
        log << "loaded " << res.records.size() << " trial records from " << from_archive.string() << '\n';
    } else {
        const SweepSpec spec = cfg.sweep_spec();
        const int workers =
            cfg.workers > 0 ? cfg.workers : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
        log << "running " << spec.trials_per_n * static_cast<long>(spec.n_list.size()) << " trials on " << workers
            << " worker(s)\n";
        long last = -1;
        res.records = run_sweep(spec, workers, [&](long done, long total) {
            const long pct = 100 * done / total;
            if (pct / 10 != last / 10) {
                log << "  " << done << "/" << total << '\n';
                last = pct;
            }
        });
    }

    const double j = qfi_transmittance(cfg.channel, cfg.cutoff).value;
    const int min_norm = cfg.metrics.count(Metric::Normality) ? cfg.min_normality_trials : std::numeric_limits<int>::max();
    res.rows = summarize(res.records, cfg.n_list, cfg.channel.theta, j, min_norm);

    const ConsistencyTable cons = consistency_from_records(res.records, cfg.n_list, cfg.channel.theta);
    for (const auto& row : cons.rows) {
        log << "n=" << row.n << " ok=" << row.ok << "/" << row.trials << " boundary=" << row.boundary
            << " existence_failures=" << row.existence_failures << " cutoff_failures=" << row.cutoff_failures
            << " other_failures=" << row.other_failures << '\n';
    }

    write_archive(res.archive, cfg, res.records);
    write_summary_csv(res.summary, cfg, res.rows);
    write_manifest(res.manifest, cfg, "run", {kArchiveName, kSummaryName});
    return res;
}

FiMapOutputs execute_fi_map(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    const fs::path dir(cfg.out_dir);
    ensure_dir(dir);
    FiMapOutputs res;
    res.matrix = dir / kFiMapName;
    res.manifest = dir / kFiMapManifestName;
    const auto omegas = linspace(cfg.fi_map.omega_lo, cfg.fi_map.omega_hi, cfg.fi_map.omega_points);
    const auto errs = linspace(cfg.fi_map.gamma_err_lo, cfg.fi_map.gamma_err_hi, cfg.fi_map.gamma_err_points);
    res.map = fi_landscape(cfg.channel, omegas, errs, cfg.cutoff);
    log << "QFI " << fmt(res.map.qfi) << ", max CFI " << fmt(res.map.max_cfi) << " at omega "
        << fmt(omegas[res.map.arg_omega]) << ", gamma error " << fmt(errs[res.map.arg_gamma]) << " (ratio "
        << fmt(res.map.max_ratio) << ")\n";
    write_fi_map_csv(res.matrix, cfg, res.map);
    write_manifest(res.manifest, cfg, "fi-map", {kFiMapName});
    return res;
}

}  // namespace tsense
