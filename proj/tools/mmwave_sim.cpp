// SPDX-License-Identifier: Apache-2.0
//
// mmwave-discovery-lab: link-level laboratory for mm-wave base station discovery
// Copyright (C) 2026 mmwave-discovery-lab contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <cstdio>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "mmwave/errors.hpp"
#include "mmwave/ldp.hpp"
#include "mmwave/sim.hpp"

namespace {

using namespace mmwave;

struct CommonOpts {
    std::string scenario_path;
    std::string out_path = "results.csv";
    std::string format = "csv";
    std::string codebook_path;
    long trials = -1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--scenario", opts.scenario_path, "scenario JSON file")->required();
    cmd->add_option("--trials", opts.trials, "override the scenario trial count");
    cmd->add_option("--seed", opts.seed, "override the master seed")
        ->each([&](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--out", opts.out_path, "output file path");
    cmd->add_option("--format", opts.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--codebook", opts.codebook_path, "codebook JSON to use (method=file)");
    cmd->add_option("--workers", opts.workers, "worker threads (0 = hardware)");
}

sim::Scenario load_scenario(const CommonOpts& opts) {
    auto scenario = sim::scenario_from_file(opts.scenario_path);
    if (opts.trials > 0) scenario.trials = opts.trials;
    if (opts.seed_set) scenario.master_seed = opts.seed;
    if (!opts.codebook_path.empty()) {
        scenario.method = sim::CodebookMethod::file;
        scenario.codebook_path = opts.codebook_path;
    }
    scenario.validate();
    return scenario;
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const auto hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

sim::Format parse_format(const std::string& f) {
    return f == "json" ? sim::Format::json : sim::Format::csv;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mm-wave base-station discovery laboratory"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    auto* run_cmd = app.add_subcommand("run", "Monte Carlo miss-probability sweep");
    add_common(run_cmd, run_opts);

    CommonOpts fa_opts;
    auto* fa_cmd = app.add_subcommand("fa-calib", "H0 sweep false-alarm calibration");
    add_common(fa_cmd, fa_opts);

    auto* thr_cmd = app.add_subcommand("threshold", "detection threshold for a target");
    double thr_pfa = 0.001;
    int thr_nslot = 5000, thr_nr = 16, thr_l = 10, thr_ns = 100;
    thr_cmd->add_option("--p-fa", thr_pfa, "sweep false-alarm target")->required();
    thr_cmd->add_option("--n-slot", thr_nslot, "lags per sweep")->required();
    thr_cmd->add_option("--n-r", thr_nr, "receive antennas")->required();
    thr_cmd->add_option("--l", thr_l, "slots used for detection")->required();
    thr_cmd->add_option("--n-s", thr_ns, "reference-signal samples")->required();

    auto* rate_cmd = app.add_subcommand("rate", "miss-probability decay rate");
    double rate_eta = 1.0, rate_gamma = 0.1;
    int rate_nr = 16, rate_ns = 100, rate_l = 0;
    rate_cmd->add_option("--eta", rate_eta, "normalized noncentrality")->required();
    rate_cmd->add_option("--gamma", rate_gamma, "detection threshold")->required();
    rate_cmd->add_option("--n-r", rate_nr, "receive antennas")->required();
    rate_cmd->add_option("--n-s", rate_ns, "reference-signal samples")->required();
    rate_cmd->add_option("--l", rate_l, "also print the L-slot approximation");

    auto* design_cmd = app.add_subcommand("design", "synthesize a codebook to JSON");
    std::string design_method = "vm", design_topology = "open-sector";
    std::string design_out = "codebook.json";
    int design_m = 1, design_nt = 32, design_j = 8;
    std::uint64_t design_seed = 1;
    double design_sector = 30.0;
    design_cmd->add_option("--method", design_method, "cm, vm, random or omni")
        ->check(CLI::IsMember({"cm", "vm", "random", "omni"}));
    design_cmd->add_option("--m", design_m, "number of beams");
    design_cmd->add_option("--n-t", design_nt, "transmit antennas");
    design_cmd->add_option("--j", design_j, "slots per scan period");
    design_cmd->add_option("--topology", design_topology, "open-sector or half-blocked")
        ->check(CLI::IsMember({"open-sector", "half-blocked"}));
    design_cmd->add_option("--sector-half-deg", design_sector, "sector half width");
    design_cmd->add_option("--seed", design_seed, "synthesis seed");
    design_cmd->add_option("--out", design_out, "output codebook path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const auto scenario = load_scenario(run_opts);
            const auto rows = sim::run_miss_sweep(scenario, resolve_workers(run_opts.workers));
            sim::emit_results(rows, parse_format(run_opts.format), run_opts.out_path);
            std::cout << "wrote " << rows.size() << " rows to " << run_opts.out_path << '\n';
        } else if (fa_cmd->parsed()) {
            const auto scenario = load_scenario(fa_opts);
            const auto row = sim::run_fa_calibration(scenario, resolve_workers(fa_opts.workers));
            sim::emit_results({row}, parse_format(fa_opts.format), fa_opts.out_path);
            std::printf("sweep false-alarm rate %.6g (target %.6g), wrote %s\n", row.p_miss,
                        scenario.p_fa, fa_opts.out_path.c_str());
        } else if (thr_cmd->parsed()) {
            const double gamma = threshold_for_pfa(ThresholdSpec{thr_pfa, thr_nslot},
                                                   ncf::DetectorDims{thr_nr, thr_l, thr_ns});
            std::printf("gamma = %.12g\n", gamma);
        } else if (rate_cmd->parsed()) {
            const auto eval = ldp::rate_function(rate_eta, rate_gamma, rate_nr, rate_ns);
            std::printf("valid = %s\nrate  = %.12g\n", eval.valid ? "true" : "false",
                        eval.value);
            if (rate_l > 0) {
                std::printf("approx(L=%d) = %.12g\n", rate_l,
                            ldp::miss_approx(rate_l, eval));
            }
        } else if (design_cmd->parsed()) {
            sim::Scenario scenario;
            scenario.topology = design_topology == "half-blocked"
                                    ? sim::Topology::half_blocked
                                    : sim::Topology::open_sector;
            scenario.sector_half_deg = design_sector;
            scenario.n_t = design_nt;
            scenario.m = design_m;
            scenario.j_total = design_j;
            scenario.design_seed = design_seed;
            if (design_method == "cm") scenario.method = sim::CodebookMethod::cm;
            else if (design_method == "vm") scenario.method = sim::CodebookMethod::vm;
            else if (design_method == "random") scenario.method = sim::CodebookMethod::random;
            else scenario.method = sim::CodebookMethod::omni;

            const auto prepared = sim::prepare_codebook(scenario);
            beam::CodebookMeta meta;
            meta.method = prepared.method_label;
            meta.m = static_cast<int>(prepared.codebook.beams.size());
            meta.target_profile_hash =
                beam::target_profile_hash(sim::scenario_pathloss(scenario, 1.0));
            beam::save_codebook(prepared.codebook, meta, design_out);
            std::cout << "wrote codebook to " << design_out << '\n';
        }
    } catch (const config_error& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
