// cli.hpp
//
// Subcommands gen / analyze / run / sweep / report. Exit codes:
// 0 ok, 2 bad flags, 3 validation failure, 4 I/O failure.
#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bestk/complexity.hpp"
#include "bestk/errors.hpp"
#include "bestk/harness.hpp"
#include "bestk/instance.hpp"

namespace bestk {

enum ExitCode : int { exit_ok = 0, exit_flags = 2, exit_validation = 3, exit_io = 4 };

namespace cli_detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    return f;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

inline AlgorithmConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("config file " + path + ": " + e.what());
    }
    return algorithm_config_from_json(j);
}

inline std::string default_csv_path(const std::string& out) {
    const auto dot = out.rfind('.');
    const auto slash = out.rfind('/');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) return out.substr(0, dot) + ".csv";
    return out + ".csv";
}

inline void print_table(std::ostream& os, const ComplexityReport& rep) {
    char line[256];
    std::snprintf(line, sizeof line, "n=%zu k=%zu gap_k=%.6g\n", rep.n, rep.k, rep.gap_k);
    os << line;
    auto row = [&](const char* name, double v) {
        std::snprintf(line, sizeof line, "  %-28s %.10g\n", name, v);
        os << line;
    };
    row("H", rep.H);
    row("H_tilde", rep.H_tilde);
    row("H_large (lower)", rep.H_large_lb);
    row("H_small (lower)", rep.H_small_lb);
    row("H_tilde_large cumulative", rep.H_tilde_large);
    row("H_tilde_small cumulative", rep.H_tilde_small);
    row("H_tilde_large per-level", rep.H_tilde_large_per_level);
    row("H_tilde_small per-level", rep.H_tilde_small_per_level);
    row("H ln k", rep.H_ln_k);
    row("ratio vs lower, lnln n", rep.ratio_lnln_n);
    row("ratio vs H ln k", rep.ratio_ln_k);
    os << "  level  eps         |GL|  |GS|  |GL>=|  |GS>=|\n";
    for (const auto& lv : rep.per_level_breakdown) {
        std::snprintf(line, sizeof line, "  %5d  %-10.6g  %4zu  %4zu  %6zu  %6zu\n", lv.level, lv.eps, lv.large,
                      lv.small, lv.large_at_least, lv.small_at_least);
        os << line;
    }
}

struct RunFlags {
    std::vector<std::string> algos{"bilateral"};
    std::vector<double> deltas{0.1};
    std::size_t trials = 100;
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
    std::string config_path;
    std::string out;
    std::string csv;
};

inline void add_run_flags(CLI::App* sub, RunFlags& f, bool multi) {
    if (multi) {
        sub->add_option("--algo", f.algos, "bilateral and/or uniform")->delimiter(',');
        sub->add_option("--delta", f.deltas, "confidence parameter(s)")->delimiter(',');
    } else {
        sub->add_option("--algo", f.algos.front(), "bilateral | uniform")
            ->check(CLI::IsMember({"bilateral", "uniform"}));
        sub->add_option("--delta", f.deltas.front(), "confidence parameter");
    }
    sub->add_option("--trials", f.trials, "number of trials")->check(CLI::Range(std::size_t{1}, std::size_t{1} << 40));
    sub->add_option("--seed", f.seed, "master seed");
    sub->add_option("--jobs", f.jobs, "worker threads")->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
    sub->add_option("--config", f.config_path, "algorithm config JSON");
    sub->add_option("--out", f.out, "raw trial stream (NDJSON)")->required();
    sub->add_option("--csv", f.csv, "aggregate CSV (default: --out with .csv extension)");
}

/// Runs every (algo, delta) cell for one instance, appending to the stream and CSV rows.
inline void run_cells(const std::string& label, const Instance& inst, const RunFlags& f, const AlgorithmConfig& algo,
                      std::ostream& stream, std::vector<std::string>& rows, std::ostream& log) {
    for (const auto& a : f.algos) {
        for (double d : f.deltas) {
            TrialConfig cfg{label, inst, parse_algorithm(a), d, f.trials, f.seed, f.jobs, algo};
            const auto run = run_trials(cfg);
            write_cell_stream(stream, cfg, run.trials);
            rows.push_back(csv_row(cell_header(cfg), run.stats));
            log << label << " " << a << " delta=" << d << ": errors=" << run.stats.errors << "/" << run.stats.trials
                << " median_samples=" << run.stats.samples.median << "\n";
        }
    }
}

inline void write_csv(const std::string& path, const std::vector<std::string>& rows) {
    auto f = open_out(path);
    f << csv_header() << '\n';
    for (const auto& r : rows) f << r << '\n';
    if (!f) throw IoError("write failed: " + path);
}

}  // namespace cli_detail

/// Entry point shared by the executable and the tests.
inline int cli_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
    using namespace cli_detail;
    CLI::App app{"Best-k-arm identification: instance analytics and Monte Carlo runs", "bestk"};
    app.require_subcommand(1, 1);

    std::string family, params, out_path, instance_path, in_path, format = "csv";
    std::vector<std::string> grid;
    RunFlags rf;

    auto* gen = app.add_subcommand("gen", "generate an instance from a family");
    gen->add_option("--family", family, "appendix_a | symmetric_best1 | uniform_gaps | random")->required();
    gen->add_option("--params", params, "comma-separated key=value list");
    gen->add_option("--out", out_path, "instance JSON path (default: stdout)");

    auto* analyze_cmd = app.add_subcommand("analyze", "compute complexity terms of an instance");
    analyze_cmd->add_option("--instance", instance_path, "instance JSON")->required();
    analyze_cmd->add_option("--out", out_path, "report JSON path");

    auto* run_cmd = app.add_subcommand("run", "Monte Carlo trials on one instance");
    run_cmd->add_option("--instance", instance_path, "instance JSON")->required();
    add_run_flags(run_cmd, rf, false);

    auto* sweep = app.add_subcommand("sweep", "trials over a cartesian grid of family parameters");
    sweep->add_option("--family", family, "instance family")->required();
    sweep->add_option("--params", params, "fixed family parameters");
    sweep->add_option("--grid", grid, "key=v1,v2,... (repeatable)")->take_all()->delimiter(';');
    add_run_flags(sweep, rf, true);

    auto* report = app.add_subcommand("report", "recompute aggregates from raw trial streams");
    report->add_option("--in", in_path, "NDJSON trial stream")->required();
    report->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    report->add_option("--out", out_path, "output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_flags;
    }

    try {
        if (*gen) {
            const Instance inst = generate_family(family, parse_family_params(params));
            if (out_path.empty())
                out << to_json(inst).dump(2) << '\n';
            else
                save_instance(inst, out_path);
        } else if (*analyze_cmd) {
            const Instance inst = load_instance(instance_path);
            const auto rep = analyze(inst);
            print_table(out, rep);
            if (!out_path.empty()) {
                auto f = open_out(out_path);
                nlohmann::json j = to_json(rep);
                j["instance"] = to_json(inst);
                f << j.dump(2) << '\n';
            }
        } else if (*run_cmd) {
            const Instance inst = load_instance(instance_path);
            const auto algo = load_config(rf.config_path);
            auto stream = open_out(rf.out);
            std::vector<std::string> rows;
            run_cells(instance_path, inst, rf, algo, stream, rows, out);
            write_csv(rf.csv.empty() ? default_csv_path(rf.out) : rf.csv, rows);
        } else if (*sweep) {
            const auto base = parse_family_params(params);
            std::vector<std::pair<std::string, std::vector<std::string>>> axes;
            for (const auto& g : grid) {
                const auto eq = g.find('=');
                if (eq == std::string::npos || eq == 0) throw ValidationError("grid: expected key=v1,v2 in \"" + g + "\"");
                auto values = split(g.substr(eq + 1), ',');
                if (values.empty()) throw ValidationError("grid: no values for " + g.substr(0, eq));
                axes.emplace_back(g.substr(0, eq), std::move(values));
            }
            const auto algo = load_config(rf.config_path);
            auto stream = open_out(rf.out);
            std::vector<std::string> rows;
            std::vector<std::size_t> idx(axes.size(), 0);
            for (;;) {
                FamilyParams p = base;
                for (std::size_t a = 0; a < axes.size(); ++a) p[axes[a].first] = axes[a].second[idx[a]];
                const Instance inst = generate_family(family, p);
                run_cells(family_label(family, p), inst, rf, algo, stream, rows, out);
                std::size_t a = 0;
                for (; a < axes.size(); ++a) {
                    if (++idx[a] < axes[a].second.size()) break;
                    idx[a] = 0;
                }
                if (a == axes.size()) break;
            }
            write_csv(rf.csv.empty() ? default_csv_path(rf.out) : rf.csv, rows);
        } else if (*report) {
            std::ifstream in(in_path);
            if (!in) throw IoError("cannot open " + in_path);
            const auto cells = read_cell_streams(in);
            std::ostringstream buf;
            if (format == "csv") {
                buf << csv_header() << '\n';
                for (const auto& c : cells) buf << csv_row(c.header, aggregate(c.trials)) << '\n';
            } else {
                nlohmann::json arr = nlohmann::json::array();
                for (const auto& c : cells) arr.push_back({{"header", c.header}, {"aggregate", to_json(aggregate(c.trials))}});
                buf << arr.dump(2) << '\n';
            }
            if (out_path.empty()) {
                out << buf.str();
            } else {
                auto f = open_out(out_path);
                f << buf.str();
            }
        }
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return exit_io;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        return exit_validation;
    }
    return exit_ok;
}

}  // namespace bestk
