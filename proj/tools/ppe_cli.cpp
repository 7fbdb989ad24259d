// Command-line front end: estimate, simulate, crb, weights, selftest, synthesize.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ppe/analysis.hpp"
#include "ppe/basis.hpp"
#include "ppe/errors.hpp"
#include "ppe/estimator.hpp"
#include "ppe/harness.hpp"
#include "ppe/selftest.hpp"
#include "ppe/signal_ops.hpp"
#include "ppe/weights.hpp"

#ifndef PPE_VERSION
#define PPE_VERSION "unknown"
#endif

namespace {

using ppe::Json;
using ppe::MultiIndex;
using ppe::ValidationError;

Json parse_json_flag(const std::string& text, const char* flag) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ValidationError(std::string(flag) + ": not valid JSON (" + e.what() + ")");
    }
}

std::vector<MultiIndex> parse_degree_list(const std::string& text) {
    try {
        return parse_json_flag(text, "--degrees").get<std::vector<MultiIndex>>();
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("--degrees: expected an array of integer arrays (") + e.what() + ")");
    }
}

ppe::DegreeSet parse_degrees(const std::string& text) { return ppe::build_total_order(parse_degree_list(text)); }

MultiIndex parse_multi_index(const std::string& text, const char* flag) {
    try {
        return parse_json_flag(text, flag).get<MultiIndex>();
    } catch (const Json::exception& e) {
        throw ValidationError(std::string(flag) + ": expected an integer array (" + e.what() + ")");
    }
}

std::vector<MultiIndex> parse_lags(const std::string& text) {
    try {
        return parse_json_flag(text, "--lags").get<std::vector<MultiIndex>>();
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("--lags: expected an array of integer arrays (") + e.what() + ")");
    }
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Writes to the --out path, or stdout when it is empty or "-".
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write to " + path + " failed");
}

// Flag beats the PPSG_SEED environment variable, which beats the fallback.
std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t flag_value, std::uint64_t fallback) {
    if (flag->count() > 0) return flag_value;
    if (const char* env = std::getenv("PPSG_SEED"); env && *env) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ValidationError(std::string("PPSG_SEED: not an unsigned integer: ") + env);
        }
    }
    return fallback;
}

std::string degree_label(const MultiIndex& m) {
    std::string out;
    for (std::size_t d = 0; d < m.dim(); ++d) out += (d ? "_" : "") + std::to_string(m[d]);
    return out;
}

struct RangeSpec {
    double start, stop, step;
};

RangeSpec parse_range(const std::string& text) {
    RangeSpec r{};
    char extra = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &r.start, &r.stop, &r.step, &extra) != 3) {
        throw ValidationError("--snr-db-range: expected start:stop:step, got '" + text + "'");
    }
    if (!(r.step > 0.0) || r.stop < r.start) throw ValidationError("--snr-db-range: need step > 0 and start <= stop");
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polynomial phase estimation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", PPE_VERSION);

    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string out_path;
    auto add_common = [&](CLI::App* sub) {
        auto* opt = sub->add_option("--seed", seed, "Random seed (default 0, or PPSG_SEED)");
        sub->add_option("--threads", threads, "Worker threads for Monte-Carlo runs (0 = all cores)");
        sub->add_option("--out", out_path, "Output path (stdout if omitted)");
        return opt;
    };

    // estimate
    auto* est = app.add_subcommand("estimate", "Estimate polynomial coefficients from a signal file");
    std::string input, degrees_text, averaging_text = "circular", lags_text, basis_text = "binomial";
    bool general = false;
    est->add_option("--input", input, "Signal file (.ppsg binary or .csv)")->required();
    est->add_option("--degrees", degrees_text, "Degree set as JSON, e.g. [[0],[1]]")->required();
    est->add_option("--averaging", averaging_text, "linear | kay | lw | circular")->check(CLI::IsMember({"linear", "kay", "lw", "circular"}));
    est->add_option("--lags", lags_text, "Lag schedule as JSON, e.g. [[1],[2],[4]]");
    est->add_option("--basis", basis_text, "binomial | monomial | both")->check(CLI::IsMember({"binomial", "monomial", "both"}));
    est->add_flag("--general", general, "Estimate over the downward closure and project (for non-closed degree sets)");
    add_common(est);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run a Monte-Carlo SNR sweep");
    std::string config_path;
    sim->add_option("--config", config_path, "Experiment JSON file")->required();
    auto* sim_seed = add_common(sim);
    auto* sim_threads = sim->get_option("--threads");

    // crb
    auto* crb_cmd = app.add_subcommand("crb", "Cramer-Rao bound diagonal and reconstruction bound versus SNR");
    std::string window_text, range_text;
    crb_cmd->add_option("--degrees", degrees_text, "Degree set as JSON")->required();
    crb_cmd->add_option("--window", window_text, "Window as JSON, e.g. [64]")->required();
    crb_cmd->add_option("--snr-db-range", range_text, "start:stop:step in dB (inclusive)")->required();
    add_common(crb_cmd);

    // weights
    auto* wts = app.add_subcommand("weights", "Dump optimal averaging weights as CSV");
    std::string k_text, tau_text;
    wts->add_option("--k", k_text, "Difference order as JSON, e.g. [2]")->required();
    wts->add_option("--tau", tau_text, "Lag as JSON (default all ones)");
    wts->add_option("--window", window_text, "Window as JSON")->required();
    add_common(wts);

    // selftest
    auto* self = app.add_subcommand("selftest", "Run the exact-identity suite");
    add_common(self);

    // synthesize
    auto* syn = app.add_subcommand("synthesize", "Write a (noisy) polynomial phase signal");
    std::string coeffs_text, syn_basis = "binomial";
    std::optional<double> snr_db;
    syn->add_option("--degrees", degrees_text, "Degree set as JSON")->required();
    syn->add_option("--coeffs", coeffs_text, "Coefficients as JSON array, one per listed degree")->required();
    syn->add_option("--basis", syn_basis, "binomial | monomial")->check(CLI::IsMember({"binomial", "monomial"}));
    syn->add_option("--window", window_text, "Window as JSON")->required();
    syn->add_option("--snr-db", snr_db, "Add complex Gaussian noise at this SNR (noise-free if omitted)");
    auto* syn_seed = add_common(syn);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*est) {
            ppe::EstimatorConfig cfg;
            cfg.degrees = parse_degrees(degrees_text);
            cfg.averaging = ppe::parse_averaging(averaging_text);
            if (!lags_text.empty()) cfg.lags = parse_lags(lags_text);
            cfg.general_degree_handling = general;
            const ppe::Signal y = ppe::load_signal(input);
            ppe::Estimate e = ppe::estimate(y, cfg);
            if (basis_text != "binomial") {
                e.monomial = ppe::compute_new_coordinate(e.binomial, ppe::binomial_to_monomial_matrix(cfg.degrees));
            }
            Json j = e;
            if (basis_text == "monomial") j.erase("binomial");
            emit(out_path, j.dump(2) + "\n");
        } else if (*sim) {
            std::ifstream in(config_path);
            if (!in) throw ValidationError("cannot open config file " + config_path);
            Json raw;
            try {
                raw = Json::parse(in);
            } catch (const Json::parse_error& e) {
                throw ValidationError("config file is not valid JSON: " + std::string(e.what()));
            }
            ppe::ExperimentConfig cfg = ppe::experiment_config_from_json(raw);
            cfg.master_seed = resolve_seed(sim_seed, seed, cfg.master_seed);
            if (sim_threads->count() > 0) cfg.threads = threads;
            const ppe::ExperimentResult result = ppe::run_sweep(cfg);

            std::ostringstream csv;
            ppe::write_result_csv(csv, result);
            emit(out_path, csv.str());

            Json sidecar = Json::object();
            sidecar["version"] = PPE_VERSION;
            sidecar["config"] = result.config;
            if (out_path.empty() || out_path == "-") {
                std::cerr << sidecar.dump(2) << "\n";
            } else {
                std::filesystem::path side(out_path);
                side.replace_extension(".json");
                if (side == std::filesystem::path(out_path)) side += ".sidecar.json";
                emit(side.string(), sidecar.dump(2) + "\n");
            }
        } else if (*crb_cmd) {
            const ppe::DegreeSet degrees = parse_degrees(degrees_text);
            const MultiIndex window = parse_multi_index(window_text, "--window");
            const RangeSpec range = parse_range(range_text);
            std::ostringstream csv;
            csv << "snr_db";
            for (const auto& m : degrees) csv << ",crb_" << degree_label(m);
            csv << ",reconstruction_bound\n";
            const auto steps = static_cast<long>(std::floor((range.stop - range.start) / range.step + 1e-9));
            for (long i = 0; i <= steps; ++i) {
                const double db = range.start + static_cast<double>(i) * range.step;
                const double snr = ppe::db_to_linear(db);
                const Eigen::MatrixXd bound = ppe::crb(degrees, window, snr);
                csv << format_number(db);
                for (Eigen::Index p = 0; p < bound.rows(); ++p) csv << ',' << format_number(bound(p, p));
                csv << ',' << format_number(ppe::reconstruction_bound(degrees, snr)) << '\n';
            }
            emit(out_path, csv.str());
        } else if (*wts) {
            const MultiIndex k = parse_multi_index(k_text, "--k");
            const MultiIndex window = parse_multi_index(window_text, "--window");
            const MultiIndex tau = tau_text.empty() ? MultiIndex::ones(window.dim()) : parse_multi_index(tau_text, "--tau");
            const ppe::WeightField w = ppe::weight_multi(k, tau, window);
            std::ostringstream csv;
            for (std::size_t d = 0; d < w.dim(); ++d) csv << 'n' << d << ',';
            csv << "weight\n";
            std::size_t flat = 0;
            ppe::for_each_in_box(w.window(), [&](const MultiIndex& n) {
                for (std::size_t d = 0; d < n.dim(); ++d) csv << n[d] << ',';
                csv << format_number(w[flat++]) << '\n';
            });
            emit(out_path, csv.str());
        } else if (*self) {
            std::ostringstream report;
            bool all = true;
            for (const auto& group : ppe::run_identity_suite()) {
                report << (group.passed ? "PASS " : "FAIL ") << group.name << ": " << group.detail << '\n';
                all = all && group.passed;
            }
            emit(out_path, report.str());
            return all ? 0 : 2;
        } else if (*syn) {
            const auto listed = parse_degree_list(degrees_text);
            const ppe::DegreeSet degrees = ppe::build_total_order(listed);
            const MultiIndex window = parse_multi_index(window_text, "--window");
            std::vector<double> given;
            try {
                given = parse_json_flag(coeffs_text, "--coeffs").get<std::vector<double>>();
            } catch (const Json::exception& e) {
                throw ValidationError(std::string("--coeffs: expected an array of numbers (") + e.what() + ")");
            }
            if (given.size() != listed.size() || listed.size() != degrees.size()) {
                throw ValidationError("--coeffs: need one value per listed degree (no duplicates)");
            }
            // values follow the degrees as listed on the command line
            ppe::CoefficientVector coeffs = ppe::CoefficientVector::zeros(ppe::parse_basis(syn_basis), degrees);
            for (std::size_t i = 0; i < listed.size(); ++i) coeffs.values[*degrees.position(listed[i])] = given[i];
            ppe::Signal s = ppe::synthesize(coeffs, window);
            if (snr_db) {
                ppe::Rng rng(resolve_seed(syn_seed, seed, 0));
                s = ppe::add_noise(s, ppe::db_to_linear(*snr_db), rng);
            }
            if (out_path.empty() || out_path == "-") throw ValidationError("synthesize: --out is required");
            if (std::filesystem::path(out_path).extension() == ".csv") {
                std::ostringstream csv;
                ppe::write_signal_csv(csv, s);
                emit(out_path, csv.str());
            } else {
                ppe::write_signal_file(out_path, s);
            }
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
