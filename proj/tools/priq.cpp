// priq: batch front-end for the priority-queue distribution library.
//
// Subcommands: solve-fft, solve-fpi, diagnose, probe-fft, simulate. Every
// run writes its artifacts next to the --out prefix plus a manifest that
// records the effective configuration and an FNV-1a 64 checksum per file,
// so a rerun can prove it reproduced the same bytes. Exit codes: 0 success,
// 2 rejected input, 3 numeric failure, 4 resource limit.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "priq/diagnostics.hpp"
#include "priq/errors.hpp"
#include "priq/fpi.hpp"
#include "priq/inversion.hpp"
#include "priq/io.hpp"
#include "priq/model.hpp"
#include "priq/pgf.hpp"
#include "priq/pmf.hpp"
#include "priq/simulator.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// shared plumbing

struct ModelFlags {
    std::vector<double> lambda;
    double mu = 1.0;
    int servers = 1;
    double r = -1.0;
    std::vector<double> nu;
};

void add_model_flags(CLI::App* cmd, ModelFlags& mf) {
    cmd->add_option("--lambda", mf.lambda,
                    "per-level arrival rates, highest priority first")
        ->delimiter(',');
    cmd->add_option("--mu", mf.mu, "service rate per server (default 1)");
    cmd->add_option("-c,--servers", mf.servers, "server count (default 1)");
    cmd->add_option("--r", mf.r, "total per-server load, in (0, 1)");
    cmd->add_option("--nu", mf.nu, "level fractions of the total load")->delimiter(',');
}

priq::ModelParams build_model(const ModelFlags& mf) {
    const bool rates = !mf.lambda.empty();
    const bool fractions = mf.r >= 0.0 || !mf.nu.empty();
    if (rates == fractions)
        throw priq::ValidationError(
            "ModelSpec", "give the model as either --lambda/--mu/-c or --r/--nu/-c");
    if (rates) return priq::ModelParams::from_rates(mf.lambda, mf.mu, mf.servers);
    if (!(mf.r >= 0.0) || mf.nu.empty())
        throw priq::ValidationError("ModelSpec", "--r and --nu must be given together");
    return priq::ModelParams::from_fractions(mf.r, mf.nu, mf.servers, mf.mu);
}

json model_json(const priq::ModelParams& m) {
    return json{{"loads", std::vector<double>(m.loads().begin(), m.loads().end())},
                {"servers", m.servers()},
                {"mu", m.mu()}};
}

// Memory budget precedence: flag, then PRIQ_MEM_LIMIT_GB, then the library
// default. Enforced by the producers before they allocate.
std::uint64_t memory_limit(double flag_gb) {
    if (flag_gb > 0.0)
        return static_cast<std::uint64_t>(flag_gb * (1ull << 30));
    if (const char* env = std::getenv("PRIQ_MEM_LIMIT_GB")) {
        char* end = nullptr;
        const double gb = std::strtod(env, &end);
        if (end == env || !(gb > 0.0))
            throw priq::ValidationError("ModelSpec",
                                        "PRIQ_MEM_LIMIT_GB must be a positive number");
        return static_cast<std::uint64_t>(gb * (1ull << 30));
    }
    return priq::kDefaultMemoryLimit;
}

void ensure_parent(const std::string& prefix) {
    const auto parent = fs::path(prefix).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

// Collects artifact paths as they are written and closes the run with a
// manifest holding the effective configuration and per-file checksums.
struct Manifest {
    std::string subcommand;
    json config = json::object();
    std::vector<std::string> files;

    void add(const std::string& path) { files.push_back(path); }

    // export_pmf writes a metadata/data pair; record both.
    void add_pmf(const std::string& meta_path, const std::string& format) {
        add(meta_path);
        const auto data_ext = format == "csv" ? ".csv" : ".f64";
        add(meta_path.substr(0, meta_path.size() - 5) + data_ext);
    }

    std::string write(const std::string& prefix) {
        json arts = json::array();
        for (const auto& f : files) {
            char hex[19];
            std::snprintf(hex, sizeof hex, "0x%016llx",
                          static_cast<unsigned long long>(priq::fnv1a64_file(f)));
            arts.push_back({{"file", fs::path(f).filename().string()},
                            {"fnv1a64", hex}});
        }
        const json m{{"subcommand", subcommand}, {"config", config}, {"artifacts", arts}};
        const std::string path = prefix + ".manifest.json";
        std::ofstream out(path);
        if (!out) throw priq::ResourceError("WriteFailed", "cannot create " + path);
        out << m.dump(2) << '\n';
        return path;
    }
};

priq::ArrayFormat parse_format(const std::string& s) {
    if (s == "csv") return priq::ArrayFormat::Csv;
    if (s == "f64") return priq::ArrayFormat::RawF64;
    throw priq::ValidationError("ModelSpec", "--format must be csv or f64");
}

void write_csv_file(const std::string& path, const std::string& header,
                    const std::function<void(std::ofstream&)>& body) {
    std::ofstream out(path);
    if (!out) throw priq::ResourceError("WriteFailed", "cannot create " + path);
    out << header << '\n';
    body(out);
    if (!out) throw priq::ResourceError("WriteFailed", "short write to " + path);
}

// ---------------------------------------------------------------------------
// solve-fft / solve-fpi

struct SolveFlags {
    ModelFlags model;
    int n_max = 100;
    int components = 4;
    double spread = 0.05;
    double alpha = 12.0;
    int n_fft = 0;
    double tol = 1e-9;
    std::uint64_t max_iters = 1'000'000;
    double mem_gb = 0.0;
    std::string out;
    std::string format = "f64";
};

void export_pair(const priq::JointPmf& wait, const SolveFlags& fl, Manifest& man) {
    const auto fmt = parse_format(fl.format);
    ensure_parent(fl.out);
    man.add_pmf(priq::export_pmf(wait, fl.out + "_wait", fmt), fl.format);
    man.add_pmf(priq::export_pmf(priq::full_pmf(wait), fl.out + "_full", fmt), fl.format);
}

int run_solve_fft(const SolveFlags& fl) {
    const auto m = build_model(fl.model);
    if (m.levels() < 2)
        throw priq::ValidationError(
            "LevelCountUnsupported",
            "one level needs no transform: the aggregate queue length is geometric, "
            "(1-r) r^n conditioned on waiting");
    const auto scheme =
        priq::plan_scheme(m, fl.n_max, fl.components, fl.spread, fl.alpha, fl.n_fft);
    const auto pmf =
        priq::invert_joint(priq::PgfEvaluator(m), scheme, fl.n_max, memory_limit(fl.mem_gb));

    Manifest man{"solve-fft",
                 {{"model", model_json(m)},
                  {"n_max", fl.n_max},
                  {"components", fl.components},
                  {"spread", fl.spread},
                  {"alpha", fl.alpha},
                  {"n_fft", scheme.n_fft},
                  {"format", fl.format}},
                 {}};
    export_pair(pmf, fl, man);
    man.write(fl.out);
    std::printf("solve-fft: K=%d n_max=%d n_fft=%d worst_negative=%.3e -> %s_{wait,full}\n",
                m.levels(), fl.n_max, scheme.n_fft, pmf.generator.worst_negative,
                fl.out.c_str());
    return 0;
}

int run_solve_fpi(const SolveFlags& fl) {
    const auto m = build_model(fl.model);
    if (m.total_load() > 0.95)
        std::fprintf(stderr,
                     "warning: load %.3f is close to saturation; the iteration "
                     "converges very slowly there\n",
                     m.total_load());
    priq::FpiOptions opt;
    opt.eps_tol = fl.tol;
    opt.max_iters = fl.max_iters;
    opt.memory_limit_bytes = memory_limit(fl.mem_gb);
    const auto pmf = priq::run_fpi(m, fl.n_max, opt);

    Manifest man{"solve-fpi",
                 {{"model", model_json(m)},
                  {"n_max", fl.n_max},
                  {"tol", fl.tol},
                  {"max_iters", fl.max_iters},
                  {"format", fl.format}},
                 {}};
    export_pair(pmf, fl, man);
    man.write(fl.out);
    std::printf("solve-fpi: K=%d n_max=%d iterations=%llu final_delta=%.3e -> %s_{wait,full}\n",
                m.levels(), fl.n_max,
                static_cast<unsigned long long>(pmf.generator.iterations),
                pmf.generator.final_delta, fl.out.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseFlags {
    int levels = 4;
    double r = 0.9;
    int servers = 1;
    double mu = 1.0;
    int n_max = 100;
    int trials = 1;
    std::uint64_t seed = 42;
    std::string tests = "agg,nn,xhi,xlo";
    double pmin_agg = 2.4e-6;
    double pmin_nn = 1e-10;
    double pmin_xhi = 1e-20;
    double pmin_xlo = 1e-6;
    double pmin_fpi = 1e-10;
    int n_lim = -1;
    int components = 4;
    double spread = 0.05;
    double alpha = 12.0;
    int n_fft = 0;
    double tol = 1e-9;
    std::uint64_t max_iters = 1'000'000;
    double mem_gb = 0.0;
    std::string out;
};

std::vector<std::string> parse_tests(const std::string& csv) {
    static const std::vector<std::string> known{"agg", "nn", "xhi", "xlo", "fpi"};
    std::vector<std::string> picked;
    std::string token;
    const auto flush = [&] {
        if (token.empty()) return;
        if (token == "all") {
            picked = known;
        } else if (std::find(known.begin(), known.end(), token) != known.end()) {
            if (std::find(picked.begin(), picked.end(), token) == picked.end())
                picked.push_back(token);
        } else {
            throw priq::ValidationError("ModelSpec", "unknown test: " + token);
        }
        token.clear();
    };
    for (char c : csv) {
        if (c == ',')
            flush();
        else
            token += c;
    }
    flush();
    if (picked.empty())
        throw priq::ValidationError("ModelSpec", "--tests selected nothing");
    return picked;
}

void write_trace_csv(const std::string& path, const priq::DiagnosticsReport& rep,
                     Manifest& man) {
    write_csv_file(path, "index,digits", [&](std::ofstream& out) {
        for (const auto& row : rep.trace)
            out << row.index << ',' << row.digits << '\n';
    });
    man.add(path);
}

int run_diagnose(const DiagnoseFlags& fl) {
    const auto selected = parse_tests(fl.tests);
    const bool wants_transform = std::any_of(
        selected.begin(), selected.end(), [](const std::string& t) { return t != "fpi"; });
    const auto nus = priq::sample_simplex(fl.levels, fl.trials, fl.seed);
    ensure_parent(fl.out);

    Manifest man{"diagnose",
                 {{"levels", fl.levels},
                  {"r", fl.r},
                  {"servers", fl.servers},
                  {"mu", fl.mu},
                  {"n_max", fl.n_max},
                  {"trials", fl.trials},
                  {"seed", fl.seed},
                  {"tests", fl.tests},
                  {"p_min",
                   {{"agg", fl.pmin_agg},
                    {"nn", fl.pmin_nn},
                    {"xhi", fl.pmin_xhi},
                    {"xlo", fl.pmin_xlo},
                    {"fpi", fl.pmin_fpi}}},
                  {"n_lim", fl.n_lim},
                  {"components", fl.components},
                  {"spread", fl.spread},
                  {"alpha", fl.alpha},
                  {"n_fft", fl.n_fft}},
                 {}};

    // Worst digits per abscissa across trials, the envelope of the traces.
    std::map<std::string, std::map<std::size_t, double>> envelope;
    json tests_json = json::object();
    for (const auto& t : selected)
        tests_json[t] = {{"worst_xi", nullptr}, {"trials", json::array()}};

    const auto mem = memory_limit(fl.mem_gb);
    for (int t = 0; t < fl.trials; ++t) {
        const auto m = priq::ModelParams::from_fractions(fl.r, nus[static_cast<std::size_t>(t)],
                                                         fl.servers, fl.mu);
        std::vector<std::pair<std::string, priq::DiagnosticsReport>> reports;
        if (wants_transform) {
            const auto scheme = priq::plan_scheme(m, fl.n_max, fl.components, fl.spread,
                                                  fl.alpha, fl.n_fft);
            const auto pmf = priq::invert_joint(priq::PgfEvaluator(m), scheme, fl.n_max, mem);
            for (const auto& name : selected) {
                if (name == "agg")
                    reports.emplace_back(name, priq::agg_test(pmf, fl.pmin_agg, fl.n_lim));
                else if (name == "nn")
                    reports.emplace_back(name, priq::nn_test(pmf, fl.pmin_nn, fl.n_lim));
                else if (name == "xhi")
                    reports.emplace_back(name, priq::xhi_test(pmf, fl.pmin_xhi, fl.n_lim));
                else if (name == "xlo") {
                    priq::PgfEvaluator ev(m);
                    const auto marg = priq::invert_marginal(
                        [&](priq::cplx z) { return ev.marginal_pgf(1, z); }, scheme,
                        fl.n_max);
                    reports.emplace_back(name,
                                         priq::xlo_test(pmf, marg, fl.pmin_xlo, fl.n_lim));
                }
            }
        }
        if (std::find(selected.begin(), selected.end(), "fpi") != selected.end()) {
            priq::FpiTestOptions opt;
            opt.p_min = fl.pmin_fpi;
            opt.n_lim = fl.n_lim;
            opt.components = fl.components;
            opt.spread = fl.spread;
            opt.alpha = fl.alpha;
            opt.fpi.eps_tol = fl.tol;
            opt.fpi.max_iters = fl.max_iters;
            opt.fpi.memory_limit_bytes = mem;
            opt.memory_limit_bytes = mem;
            reports.emplace_back("fpi", priq::fpi_test(m, fl.n_max, opt));
        }

        for (const auto& [name, rep] : reports) {
            write_trace_csv(fl.out + "_t" + std::to_string(t) + "_" + name + ".csv", rep,
                            man);
            auto& env = envelope[name];
            for (const auto& row : rep.trace) {
                const auto it = env.find(row.index);
                if (it == env.end() || row.digits < it->second) env[row.index] = row.digits;
            }
            auto& bucket = tests_json[name];
            if (bucket["worst_xi"].is_null() || rep.xi < bucket["worst_xi"].get<double>())
                bucket["worst_xi"] = rep.xi;
            bucket["trials"].push_back({{"trial", t},
                                        {"nu", nus[static_cast<std::size_t>(t)]},
                                        {"xi", rep.xi},
                                        {"admitted", rep.admitted},
                                        {"excluded", rep.excluded}});
        }
    }

    for (const auto& [name, env] : envelope) {
        const auto path = fl.out + "_" + name + "_envelope.csv";
        write_csv_file(path, "index,worst_digits", [&](std::ofstream& out) {
            for (const auto& [idx, digits] : env) out << idx << ',' << digits << '\n';
        });
        man.add(path);
    }
    {
        const auto path = fl.out + "_summary.json";
        std::ofstream out(path);
        if (!out) throw priq::ResourceError("WriteFailed", "cannot create " + path);
        out << json{{"tests", tests_json}}.dump(2) << '\n';
        man.add(path);
    }
    man.write(fl.out);
    for (auto& [name, bucket] : tests_json.items())
        std::printf("diagnose %-3s: worst xi = %.2f over %d trial(s)\n", name.c_str(),
                    bucket["worst_xi"].get<double>(), fl.trials);
    return 0;
}

// ---------------------------------------------------------------------------
// probe-fft

struct ProbeFlags {
    double r = 0.9;
    int components = 4;
    double spread = 0.05;
    double alpha = 12.0;
    double p_min = 1e-12;
    std::string out;
};

int run_probe(const ProbeFlags& fl) {
    const auto probe = priq::error_probe(fl.r, fl.components, fl.spread, fl.alpha, fl.p_min);
    ensure_parent(fl.out);
    Manifest man{"probe-fft",
                 {{"r", fl.r},
                  {"components", fl.components},
                  {"spread", fl.spread},
                  {"alpha", fl.alpha},
                  {"p_min", fl.p_min}},
                 {}};
    const auto curve = fl.out + "_curve.csv";
    write_csv_file(curve, "n,overall,transform_part", [&](std::ofstream& out) {
        char buf[96];
        for (std::size_t n = 0; n < probe.overall.size(); ++n) {
            std::snprintf(buf, sizeof buf, "%zu,%.6e,%.6e\n", n, probe.overall[n],
                          probe.transform_part[n]);
            out << buf;
        }
    });
    man.add(curve);
    double worst = 0.0;
    for (double e : probe.overall) worst = std::max(worst, e);
    {
        const auto path = fl.out + "_summary.json";
        std::ofstream out(path);
        if (!out) throw priq::ResourceError("WriteFailed", "cannot create " + path);
        out << json{{"n_lim", probe.n_lim},
                    {"alias_part", probe.alias_part},
                    {"worst_overall", worst},
                    {"n_fft", probe.scheme.n_fft},
                    {"radii", probe.scheme.eta},
                    {"weights", probe.scheme.weights}}
                   .dump(2)
            << '\n';
        man.add(path);
    }
    man.write(fl.out);
    std::printf("probe-fft: r=%.3f depth=%d worst overall relative error=%.3e alias=%.3e\n",
                fl.r, probe.n_lim, worst, probe.alias_part);
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateFlags {
    ModelFlags model;
    std::uint64_t events = 1'000'000;
    std::uint64_t warmup = 100'000;
    std::uint64_t seed = 1;
    std::string mode = "time";
    bool compare = true;
    int compare_n_max = 0;  // 0: follow the observed histogram depth
    std::string out;
};

int run_simulate(const SimulateFlags& fl) {
    priq::SimConfig cfg{build_model(fl.model), fl.warmup, fl.events, fl.seed};
    if (fl.mode == "event")
        cfg.sampling = priq::SamplingMode::EventAveraged;
    else if (fl.mode != "time")
        throw priq::ValidationError("ModelSpec", "--mode must be time or event");
    if (cfg.sample_events < 10 * cfg.warmup_events)
        std::fprintf(stderr,
                     "warning: fewer than ten sampling events per warmup event; "
                     "estimates may carry initialization bias\n");
    const auto res = priq::simulate(cfg);
    const auto eq = priq::erlang_quantities(cfg.model);
    ensure_parent(fl.out);

    Manifest man{"simulate",
                 {{"model", model_json(cfg.model)},
                  {"events", fl.events},
                  {"warmup", fl.warmup},
                  {"seed", fl.seed},
                  {"mode", fl.mode},
                  {"compare", fl.compare}},
                 {}};

    const auto hist_path = fl.out + "_hist.csv";
    write_csv_file(hist_path, "level,n,mass,half_width", [&](std::ofstream& out) {
        char buf[96];
        for (std::size_t k = 0; k < res.level_hist.size(); ++k)
            for (std::size_t n = 0; n < res.level_hist[k].size(); ++n) {
                std::snprintf(buf, sizeof buf, "%zu,%zu,%.10e,%.3e\n", k, n,
                              res.level_hist[k][n], res.level_half_width[k][n]);
                out << buf;
            }
    });
    man.add(hist_path);
    const auto busy_path = fl.out + "_busy.csv";
    write_csv_file(busy_path, "busy,mass,half_width", [&](std::ofstream& out) {
        char buf[80];
        for (std::size_t b = 0; b < res.busy_hist.size(); ++b) {
            std::snprintf(buf, sizeof buf, "%zu,%.10e,%.3e\n", b, res.busy_hist[b],
                          res.busy_half_width[b]);
            out << buf;
        }
    });
    man.add(busy_path);

    json summary{{"sim_time", res.sim_time},
                 {"empty_fraction", res.empty_fraction},
                 {"empty_fraction_se", res.empty_fraction_se},
                 {"empty_fraction_exact", eq.p0},
                 {"level_mean", res.level_mean},
                 {"level_mean_se", res.level_mean_se}};
    if (fl.compare) {
        const auto& m = cfg.model;
        std::vector<std::vector<double>> analytic(res.level_hist.size());
        for (std::size_t k = 0; k < res.level_hist.size(); ++k) {
            const int depth = fl.compare_n_max > 0
                                  ? fl.compare_n_max
                                  : std::max<int>(static_cast<int>(res.level_hist[k].size()), 8);
            priq::PgfEvaluator ev(m);
            const int p = m.levels() - static_cast<int>(k);  // 1 = lowest level
            auto w = priq::invert_marginal(
                [&](priq::cplx z) { return ev.marginal_pgf(p, z); },
                priq::plan_scheme(m, depth), depth);
            for (auto& x : w) x *= 1.0 - eq.no_wait;
            w[0] += eq.no_wait;
            analytic[k] = std::move(w);
        }
        json rows = json::array();
        for (const auto& row : priq::compare_marginals(res, analytic))
            rows.push_back({{"level", row.level}, {"tv", row.tv}, {"max_z", row.max_z}});
        summary["comparison"] = rows;
    }
    const auto sum_path = fl.out + "_summary.json";
    {
        std::ofstream out(sum_path);
        if (!out) throw priq::ResourceError("WriteFailed", "cannot create " + sum_path);
        out << summary.dump(2) << '\n';
    }
    man.add(sum_path);
    man.write(fl.out);
    std::printf("simulate: %llu events, empty fraction %.5f +- %.5f (exact %.5f)\n",
                static_cast<unsigned long long>(fl.events), res.empty_fraction,
                res.empty_fraction_se, eq.p0);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stationary distributions of the multi-server priority queue: "
                 "transform inversion, direct iteration, diagnostics, simulation"};
    app.require_subcommand(1);

    SolveFlags solve;
    DiagnoseFlags diag;
    ProbeFlags probe;
    SimulateFlags sim;
    std::function<int()> action;

    auto* fft = app.add_subcommand("solve-fft",
                                   "joint distribution via multi-radius transform inversion");
    add_model_flags(fft, solve.model);
    fft->add_option("--nmax", solve.n_max, "per-level truncation (default 100)");
    fft->add_option("--components", solve.components, "mixture radii count (default 4)");
    fft->add_option("--spread", solve.spread, "relative radius spread (default 0.05)");
    fft->add_option("--alpha", solve.alpha, "accuracy budget in decimal digits (default 12)");
    fft->add_option("--nfft", solve.n_fft, "transform length override (default: auto)");
    fft->add_option("--mem-limit-gb", solve.mem_gb, "memory budget in GiB");
    fft->add_option("--out", solve.out, "output prefix (default priq_fft)");
    fft->add_option("--format", solve.format, "array format: f64 or csv");
    fft->callback([&] {
        action = [&] {
            if (solve.out.empty()) solve.out = "priq_fft";
            return run_solve_fft(solve);
        };
    });

    auto* fpi = app.add_subcommand("solve-fpi",
                                   "joint distribution via the direct fixed-point iteration");
    add_model_flags(fpi, solve.model);
    fpi->add_option("--nmax", solve.n_max, "per-level truncation (default 100)");
    fpi->add_option("--tol", solve.tol, "sweep convergence tolerance (default 1e-9)");
    fpi->add_option("--max-iters", solve.max_iters, "iteration cap");
    fpi->add_option("--mem-limit-gb", solve.mem_gb, "memory budget in GiB");
    fpi->add_option("--out", solve.out, "output prefix (default priq_fpi)");
    fpi->add_option("--format", solve.format, "array format: f64 or csv");
    fpi->callback([&] {
        action = [&] {
            if (solve.out.empty()) solve.out = "priq_fpi";
            return run_solve_fpi(solve);
        };
    });

    auto* dg = app.add_subcommand(
        "diagnose", "consistency tests over randomized level splits at a fixed load");
    dg->add_option("--K,--levels", diag.levels, "priority level count")->required();
    dg->add_option("--r", diag.r, "total per-server load")->required();
    dg->add_option("-c,--servers", diag.servers, "server count (default 1)");
    dg->add_option("--mu", diag.mu, "service rate per server (default 1)");
    dg->add_option("--nmax", diag.n_max, "per-level truncation (default 100)");
    dg->add_option("--trials", diag.trials, "simplex samples to test (default 1)");
    dg->add_option("--seed", diag.seed, "simplex sampler seed (default 42)");
    dg->add_option("--tests", diag.tests,
                   "comma list of agg,nn,xhi,xlo,fpi or all (default agg,nn,xhi,xlo)");
    dg->add_option("--pmin-agg", diag.pmin_agg, "aggregate-shell probability floor");
    dg->add_option("--pmin-nn", diag.pmin_nn, "balance-test probability floor");
    dg->add_option("--pmin-xhi", diag.pmin_xhi, "high-slice probability floor");
    dg->add_option("--pmin-xlo", diag.pmin_xlo, "low-slice probability floor");
    dg->add_option("--pmin-fpi", diag.pmin_fpi, "cross-method probability floor");
    dg->add_option("--nlim", diag.n_lim, "abscissa cap (default: nmax)");
    dg->add_option("--components", diag.components, "mixture radii count (default 4)");
    dg->add_option("--spread", diag.spread, "relative radius spread (default 0.05)");
    dg->add_option("--alpha", diag.alpha, "accuracy budget in digits (default 12)");
    dg->add_option("--nfft", diag.n_fft, "transform length override (default: auto)");
    dg->add_option("--tol", diag.tol, "iteration tolerance for the fpi test");
    dg->add_option("--max-iters", diag.max_iters, "iteration cap for the fpi test");
    dg->add_option("--mem-limit-gb", diag.mem_gb, "memory budget in GiB");
    dg->add_option("--out", diag.out, "output prefix (default priq_diag)");
    dg->callback([&] {
        action = [&] {
            if (diag.out.empty()) diag.out = "priq_diag";
            return run_diagnose(diag);
        };
    });

    auto* pr = app.add_subcommand("probe-fft",
                                  "transform error budget on the closed-form geometric case");
    pr->add_option("--r", probe.r, "per-server load of the geometric law")->required();
    pr->add_option("--components", probe.components, "mixture radii count (default 4)");
    pr->add_option("--spread", probe.spread, "relative radius spread (default 0.05)");
    pr->add_option("--alpha", probe.alpha, "accuracy budget in digits (default 12)");
    pr->add_option("--pmin", probe.p_min, "tail depth to probe down to (default 1e-12)");
    pr->add_option("--out", probe.out, "output prefix (default priq_probe)");
    pr->callback([&] {
        action = [&] {
            if (probe.out.empty()) probe.out = "priq_probe";
            return run_probe(probe);
        };
    });

    auto* sm = app.add_subcommand("simulate",
                                  "discrete-event cross-check of the marginal distributions");
    add_model_flags(sm, sim.model);
    sm->add_option("--events", sim.events, "sampled events (default 1e6)");
    sm->add_option("--warmup", sim.warmup, "warmup events (default 1e5)");
    sm->add_option("--seed", sim.seed, "random stream seed (default 1)");
    sm->add_option("--mode", sim.mode, "sampling mode: time or event (default time)");
    sm->add_flag("--compare,!--no-compare", sim.compare,
                 "compare histograms against inverted marginals (default on)");
    sm->add_option("--compare-nmax", sim.compare_n_max,
                   "analytic marginal depth (default: observed depth)");
    sm->add_option("--out", sim.out, "output prefix (default priq_sim)");
    sm->callback([&] {
        action = [&] {
            if (sim.out.empty()) sim.out = "priq_sim";
            return run_simulate(sim);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const priq::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    try {
        return action ? action() : 2;
    } catch (const priq::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const priq::NumericError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const priq::ResourceError& e) {
        std::fprintf(stderr, "resource limit: %s\n", e.what());
        return 4;
    }
}
