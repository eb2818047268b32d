// measure-dyn: runs certificate / witness / convergence experiments and
// writes a JSON report plus CSV curves.
//
//   measure-dyn <command> [--config file.json] [--set key=value ...] --out dir
//
// Exit codes: 0 all asserted contracts passed, 1 a contract failed (the
// failing assertion is named on stderr), 2 invalid configuration.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "measure_dyn/measure_dyn.hpp"

namespace md = measure_dyn;
using nlohmann::json;

namespace {

struct Contract {
    std::string name;
    bool passed;
    std::string detail;
};

struct RunOutput {
    json results;
    std::vector<Contract> contracts;
    std::map<std::string, std::string> csv_files;  // filename -> contents
};

json contracts_to_json(const std::vector<Contract>& cs) {
    json arr = json::array();
    for (const auto& c : cs) arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return arr;
}

// ---- config ----------------------------------------------------------------

json builtin_defaults(const std::string& command) {
    json cfg;
    cfg["window"] = {{"grid_points", 4001}};
    cfg["markov"] = {{"tol", 1e-10}, {"max_iter", 10000}, {"start", "uniform"},
                     {"safety_margin", 1e-6}, {"observed_trials", 100}};
    cfg["seed"] = 20240817;
    if (command == "all-paper") {
        cfg["weight_system"] = "paper";
        cfg["window"] = {{"lo", -10.0}, {"hi", 10.0}, {"grid_points", 4001}};
        cfg["n_max"] = 60;
        cfg["tol"] = 1e-2;
        cfg["mu"] = json::array({{{"x", 0.0}, {"re", 1.0}, {"im", 0.0}}});
        cfg["v"] = json::array({{{"x", 0.5}, {"re", 1.0}, {"im", 0.0}}});
        cfg["kernel"] = "paper-sine";
        cfg["grid_size"] = 2048;
    }
    return cfg;
}

void deep_merge(json& base, const json& overlay) {
    if (!overlay.is_object() || !base.is_object()) {
        base = overlay;
        return;
    }
    for (auto it = overlay.begin(); it != overlay.end(); ++it) {
        if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object())
            deep_merge(base[it.key()], it.value());
        else
            base[it.key()] = it.value();
    }
}

void apply_set(json& cfg, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw md::config_error("--set expects key=value, got '" + assignment + "'");
    std::string path = assignment.substr(0, eq);
    std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;  // unquoted strings like preset names
    }
    json* node = &cfg;
    std::size_t pos = 0;
    while (true) {
        auto dot = path.find('.', pos);
        std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (key.empty()) throw md::config_error("--set has an empty key segment in '" + path + "'");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            break;
        }
        if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = json::object();
        node = &(*node)[key];
        pos = dot + 1;
    }
}

const json& require_field(const json& cfg, const std::string& key, const std::string& command) {
    if (!cfg.contains(key))
        throw md::config_error("command '" + command + "' requires config field \"" + key + "\"");
    return cfg.at(key);
}

double require_number(const json& cfg, const std::string& key, const std::string& command) {
    const json& v = require_field(cfg, key, command);
    if (!v.is_number())
        throw md::config_error("config field \"" + key + "\" must be a number");
    return v.get<double>();
}

md::CompactWindow window_from_config(const json& cfg, const std::string& command) {
    const json& w = require_field(cfg, "window", command);
    if (!w.is_object() || !w.contains("lo") || !w.contains("hi"))
        throw md::config_error("command '" + command + "' requires window.lo and window.hi");
    md::CompactWindow K{w.at("lo").get<double>(), w.at("hi").get<double>(),
                        w.value("grid_points", 4001L)};
    if (!(K.lo < K.hi)) throw md::config_error("window needs lo < hi");
    if (K.grid_points < 2) throw md::config_error("window.grid_points must be >= 2");
    return K;
}

// ---- command bodies ----------------------------------------------------------

void run_certificate(const std::string& command, const json& cfg, RunOutput& out) {
    auto ws = md::parse_weight_system(
        require_field(cfg, "weight_system", command).get<std::string>());
    auto K = window_from_config(cfg, command);
    long n_max = static_cast<long>(require_number(cfg, "n_max", command));
    double tol = require_number(cfg, "tol", command);
    if (n_max < 1) throw md::config_error("n_max must be >= 1");
    if (!(tol > 0)) throw md::config_error("tol must be positive");

    md::CertificateReport rep;
    if (command == "transitivity")
        rep = md::transitivity_certificate(ws, K, n_max, tol);
    else if (command == "cosine")
        rep = md::cosine_certificate(ws, K, n_max, tol);
    else
        rep = md::chaos_certificate(ws, K, n_max, tol);

    out.results[command] = md::to_json(rep);
    out.contracts.push_back({command + " certificate passed", rep.passed,
                             "terminal scan values vs tol = " + md::double_to_string(tol)});
    out.csv_files[command + ".csv"] = md::to_csv(rep);
}

void run_mixing(const json& cfg, RunOutput& out) {
    auto ws = md::parse_weight_system(require_field(cfg, "weight_system", "mixing").get<std::string>());
    auto mu = md::measure_from_json(require_field(cfg, "mu", "mixing"));
    auto v = md::measure_from_json(require_field(cfg, "v", "mixing"));
    long n = static_cast<long>(require_number(cfg, "N", "mixing"));
    if (n < 1) throw md::config_error("N must be >= 1");

    std::string csv = "n,err_in,err_out,bound_in,bound_out\n";
    for (long k = 1; k <= n; ++k) {
        try {
            auto wit = md::mixing_witness(ws, mu, v, k);
            csv += md::long_to_string(k) + ',' + md::double_to_string(wit.err_in) + ',' +
                   md::double_to_string(wit.err_out) + ',' + md::double_to_string(wit.bound_in) +
                   ',' + md::double_to_string(wit.bound_out) + '\n';
        } catch (const md::precondition_error&) {
            // below the escape time for these supports; no witness at this k
        }
    }
    auto wit = md::mixing_witness(ws, mu, v, n);
    out.results["mixing"] = {{"n", n},
                             {"err_in", wit.err_in},
                             {"err_out", wit.err_out},
                             {"bound_in", wit.bound_in},
                             {"bound_out", wit.bound_out},
                             {"eta", md::to_json(wit.eta)}};
    out.contracts.push_back({"mixing err_in within bound", wit.err_in <= wit.bound_in * (1.0 + 1e-12),
                             md::double_to_string(wit.err_in) + " vs " + md::double_to_string(wit.bound_in)});
    out.contracts.push_back({"mixing err_out within bound",
                             wit.err_out <= wit.bound_out * (1.0 + 1e-12),
                             md::double_to_string(wit.err_out) + " vs " + md::double_to_string(wit.bound_out)});
    out.csv_files["mixing.csv"] = csv;
}

void run_periodic(const json& cfg, RunOutput& out) {
    auto ws = md::parse_weight_system(require_field(cfg, "weight_system", "periodic").get<std::string>());
    auto mu = md::measure_from_json(require_field(cfg, "mu", "periodic"));
    long N = static_cast<long>(require_number(cfg, "N", "periodic"));
    long L = static_cast<long>(require_number(cfg, "L", "periodic"));
    if (N < 1 || L < 1) throw md::config_error("periodic requires N >= 1 and L >= 1");

    std::string csv = "L,residual_T,residual_C,tail_bound\n";
    json final_row;
    double residual_T = 0, residual_C = 0, tail = 0;
    for (long l = 1; l <= L; ++l) {
        auto pp = md::periodic_point(ws, mu, N, l);
        residual_T = md::tv_norm(md::add(md::adjoint_T_star(ws, pp.v, N),
                                         md::scale(pp.v, md::cplx(-1.0, 0.0))));
        residual_C = md::tv_norm(md::add(md::cosine_adjoint(ws, pp.v, N),
                                         md::scale(pp.v, md::cplx(-1.0, 0.0))));
        tail = pp.tail_bound;
        csv += md::long_to_string(l) + ',' + md::double_to_string(residual_T) + ',' +
               md::double_to_string(residual_C) + ',' + md::double_to_string(tail) + '\n';
        if (l == L)
            final_row = {{"N", N},           {"L", L},
                         {"q_forward", pp.q_forward}, {"q_backward", pp.q_backward},
                         {"tail_bound", tail},        {"residual_T", residual_T},
                         {"residual_C", residual_C},  {"atoms", pp.v.size()}};
    }
    out.results["periodic"] = final_row;
    out.contracts.push_back({"periodic residual_T within 2*tail_bound", residual_T <= 2.0 * tail,
                             md::double_to_string(residual_T) + " vs 2*" + md::double_to_string(tail)});
    out.contracts.push_back({"periodic residual_C within 2*tail_bound", residual_C <= 2.0 * tail,
                             md::double_to_string(residual_C) + " vs 2*" + md::double_to_string(tail)});
    out.csv_files["periodic.csv"] = csv;
}

void run_markov(const json& cfg, RunOutput& out, bool paper_flavor) {
    auto preset = md::parse_kernel_preset(require_field(cfg, "kernel", "markov").get<std::string>());
    const json& mk = cfg.at("markov");
    double tol = mk.value("tol", 1e-10);
    long max_iter = mk.value("max_iter", 10000L);
    double margin = mk.value("safety_margin", 1e-6);
    int observed_trials = mk.value("observed_trials", 100);
    std::uint64_t seed = cfg.value("seed", 20240817ULL);

    md::GridDomain dom = [&] {
        if (preset.fixed_grid) return *preset.fixed_grid;
        std::size_t P = static_cast<std::size_t>(require_number(cfg, "grid_size", "markov"));
        if (P < 2) throw md::config_error("grid_size must be >= 2");
        if (preset.fixed_domain) return md::GridDomain::uniform(preset.fixed_domain->first,
                                                                preset.fixed_domain->second, P);
        if (!cfg.contains("domain") || !cfg.at("domain").contains("a") ||
            !cfg.at("domain").contains("b"))
            throw md::config_error("kernel '" + preset.name + "' requires domain.a and domain.b");
        return md::GridDomain::uniform(cfg.at("domain").at("a").get<double>(),
                                       cfg.at("domain").at("b").get<double>(), P);
    }();

    auto K = md::normalize_kernel(dom, preset.k);
    auto cert = md::contraction_certificate(K, dom, margin);
    json res;
    res["certificate"] = md::to_json(cert);
    res["ktilde_sup"] = cert.ktilde_sup;
    res["threshold"] = cert.threshold;
    res["rate"] = cert.rate;
    res["passed"] = cert.passed;
    res["grid_size"] = dom.size();

    if (preset.name == "paper-sine") {
        double dev = 0.0;
        for (std::size_t i = 0; i < dom.size(); ++i)
            dev = std::max(dev, std::abs(K.denominators()[i] -
                                         md::paper_kernel_normalizer(dom.points()[i])));
        res["denominator_max_abs_dev"] = dev;
    }

    out.contracts.push_back({"markov contraction certificate passed", cert.passed,
                             "ktilde_sup = " + md::double_to_string(cert.ktilde_sup) +
                                 " vs threshold " + md::double_to_string(cert.threshold)});
    if (!cert.passed) {
        res["refused"] = "invariant_measure not attempted: contraction certificate failed";
        out.results["markov"] = res;
        return;
    }

    auto start_measure = [&](const std::string& s) -> md::GridMeasure {
        if (s == "uniform") return md::uniform_probability(dom);
        if (s.rfind("point:", 0) == 0) {
            double x = std::stod(s.substr(6));
            auto pm = md::point_mass(dom, x);
            res["start_snap_distance"] = pm.snap_distance;
            return pm.measure;
        }
        throw md::config_error("unknown start '" + s + "' (use \"uniform\" or \"point:<x>\")");
    };

    auto inv = md::invariant_measure(K, dom, start_measure(mk.value("start", std::string("uniform"))),
                                     tol, max_iter);
    double max_rate = 0.0;
    for (double r : inv.rate_history) max_rate = std::max(max_rate, r);
    res["iterations"] = inv.iterations;
    res["residual"] = inv.residual;
    res["converged"] = inv.converged;
    res["rate_history"] = inv.rate_history;
    res["observed_contraction"] = md::observed_contraction(K, dom, observed_trials, seed);
    res["forward_range_diagnostic"] =
        md::forward_uniformization_diagnostic(K, dom, md::sample_function(dom, [](double t) { return t; }), 8);
    res["pi_csv_path"] = "markov.csv";

    out.contracts.push_back({"markov power iteration converged", inv.converged,
                             md::long_to_string(inv.iterations) + " iterations, residual " +
                                 md::double_to_string(inv.residual)});
    out.contracts.push_back({"markov observed step ratios within certified rate",
                             max_rate <= cert.rate + 1e-9,
                             "max ratio " + md::double_to_string(max_rate) + " vs rate " +
                                 md::double_to_string(cert.rate)});
    out.contracts.push_back(
        {"markov residual within Banach guard",
         inv.residual < tol * (1.0 + cert.rate) / (1.0 - cert.rate),
         md::double_to_string(inv.residual) + " vs guard " +
             md::double_to_string(tol * (1.0 + cert.rate) / (1.0 - cert.rate))});
    out.contracts.push_back({"markov observed_contraction within certified rate",
                             res["observed_contraction"].get<double>() <= cert.rate + 1e-9,
                             md::double_to_string(res["observed_contraction"].get<double>()) +
                                 " vs " + md::double_to_string(cert.rate)});

    if (paper_flavor) {
        // second start: point mass at the left endpoint, plus agreement check
        auto inv2 = md::invariant_measure(K, dom, start_measure("point:0"), tol, max_iter);
        double agree = md::tv_diff(inv.pi, inv2.pi);
        res["iterations_point_start"] = inv2.iterations;
        res["two_start_tv_difference"] = agree;
        out.contracts.push_back({"markov two starts agree", agree <= 1e-9,
                                 "TV difference " + md::double_to_string(agree)});
        out.contracts.push_back({"markov certified rate at most pi/4 + 1e-6",
                                 cert.rate <= std::numbers::pi / 4.0 + 1e-6,
                                 md::double_to_string(cert.rate)});
        for (double r : inv2.rate_history) max_rate = std::max(max_rate, r);
        out.contracts.push_back({"markov point-start ratios within certified rate",
                                 max_rate <= cert.rate + 1e-9, md::double_to_string(max_rate)});
    }

    out.results["markov"] = res;
    out.csv_files["markov.csv"] = md::invariant_measure_csv(dom, inv.pi);
}

RunOutput run_command(const std::string& command, const json& cfg) {
    RunOutput out;
    if (command == "transitivity" || command == "cosine" || command == "chaos") {
        run_certificate(command, cfg, out);
    } else if (command == "mixing") {
        run_mixing(cfg, out);
    } else if (command == "periodic") {
        run_periodic(cfg, out);
    } else if (command == "markov") {
        run_markov(cfg, out, false);
    } else if (command == "all-paper") {
        run_certificate("transitivity", cfg, out);
        run_certificate("cosine", cfg, out);
        run_certificate("chaos", cfg, out);
        {
            json sub = cfg;
            sub["N"] = 50;
            run_mixing(sub, out);
        }
        {
            json sub = cfg;
            sub["N"] = 30;
            sub["L"] = 10;
            run_periodic(sub, out);
        }
        run_markov(cfg, out, true);
    } else {
        throw md::config_error("unknown command '" + command + "'");
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"operator-dynamics certificates and invariant-measure experiments"};
    std::string command, out_dir, config_path;
    std::vector<std::string> sets;
    app.add_option("command", command, "one of: transitivity, cosine, chaos, mixing, periodic, markov, all-paper")
        ->required();
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--set", sets, "override a config field, e.g. --set window.lo=-5")
        ->take_all();
    app.add_option("--out", out_dir, "output directory")->required();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad invocation is a config error
    }

    const auto t0 = std::chrono::steady_clock::now();
    json cfg;
    try {
        static const std::vector<std::string> known = {"transitivity", "cosine", "chaos",
                                                       "mixing", "periodic", "markov", "all-paper"};
        if (std::find(known.begin(), known.end(), command) == known.end())
            throw md::config_error("unknown command '" + command + "'");
        cfg = builtin_defaults(command);
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw md::config_error("cannot open config " + config_path);
            json file_cfg = json::parse(in);
            deep_merge(cfg, file_cfg);
        }
        for (const auto& s : sets) apply_set(cfg, s);
    } catch (const json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const md::error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    RunOutput out;
    try {
        out = run_command(command, cfg);
    } catch (const md::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const md::error& e) {
        // a well-formed experiment the mathematics refused (unmet escape time,
        // non-summable series, ...): report as a failed contract
        out.results = {{"refused", e.what()}};
        out.contracts.push_back({"experiment preconditions", false, e.what()});
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json report;
    report["command"] = command;
    report["config"] = cfg;
    report["versions"] = {{"measure_dyn", md::version_string}};
    report["wall_clock_seconds"] = wall;
    report["results"] = out.results;
    report["contracts"] = contracts_to_json(out.contracts);
    bool all_passed = true;
    for (const auto& c : out.contracts) all_passed = all_passed && c.passed;
    report["passed"] = all_passed;

    try {
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        for (const auto& [name, contents] : out.csv_files)
            md::atomic_write_file(fs::path(out_dir) / name, contents);
        md::atomic_write_file(fs::path(out_dir) / "report.json", report.dump(2) + "\n");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "output error: %s\n", e.what());
        return 2;
    }

    if (!all_passed) {
        for (const auto& c : out.contracts)
            if (!c.passed)
                std::fprintf(stderr, "contract failed: %s (%s)\n", c.name.c_str(), c.detail.c_str());
        return 1;
    }
    return 0;
}
