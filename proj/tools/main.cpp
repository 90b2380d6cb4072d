#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpkde/distance.hpp"
#include "dpkde/kernel.hpp"
#include "dpkde/lscv.hpp"
#include "dpkde/quadrature.hpp"
#include "dpkde/risk.hpp"
#include "dpkde/sample.hpp"
#include "dpkde/selector.hpp"
#include "dpkde/study.hpp"
#include "dpkde/testbed.hpp"
#include "dpkde/threshold.hpp"

namespace {

using nlohmann::json;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

dpkde::Kernel parse_kernel(const std::string& name) {
    if (name == "epanechnikov" || name == "epan") return dpkde::Kernel::epanechnikov();
    if (name == "gaussian" || name == "normal") return dpkde::Kernel::gaussian();
    throw std::invalid_argument("unknown kernel: " + name);
}

dpkde::DistanceSpec parse_distance(const std::string& name) {
    if (name == "kolmogorov" || name == "ks") return dpkde::DistanceSpec::kolmogorov();
    if (name.rfind("kuiper", 0) == 0) {
        int k = 1;
        const auto colon = name.find(':');
        if (colon != std::string::npos) k = std::stoi(name.substr(colon + 1));
        return dpkde::DistanceSpec::kuiper(k);
    }
    throw std::invalid_argument("unknown distance: " + name);
}

// Threshold flag: a preset label, "L2NR", or "c,gamma" for a custom power law.
dpkde::ThresholdSpec parse_threshold(const std::string& text, const dpkde::Kernel& kernel,
                                     const dpkde::DistanceSpec& dist) {
    const auto comma = text.find(',');
    if (comma != std::string::npos) {
        const double c = std::stod(text.substr(0, comma));
        const double gamma = std::stod(text.substr(comma + 1));
        return dpkde::ThresholdSpec::power_law(c, gamma);
    }
    std::string upper(text);
    for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (upper == "L2NR") return dpkde::l2nr_spec(kernel, dist);
    if (upper.rfind("LIL", 0) == 0) {
        double eps = 0.1;
        const auto colon = upper.find(':');
        if (colon != std::string::npos) eps = std::stod(upper.substr(colon + 1));
        return dpkde::lil_threshold(kernel, dist, eps);
    }
    return dpkde::preset(text);
}

std::vector<double> read_data_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open data file: " + path);
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string token;
        if (!(ss >> token)) continue;  // blank or comment-only line
        try {
            std::size_t used = 0;
            const double v = std::stod(token, &used);
            if (used != token.size()) throw std::invalid_argument(token);
            out.push_back(v);
        } catch (const std::exception&) {
            throw IoError(path + ":" + std::to_string(lineno) +
                          ": not a number: " + token);
        }
        std::string extra;
        if (ss >> extra)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected one value per line");
    }
    return out;
}

struct GridSpec {
    double lo = 0.0, hi = 0.0;
    int steps = 0;
};

GridSpec parse_grid(const std::string& text) {
    GridSpec g;
    if (std::sscanf(text.c_str(), "%lf:%lf:%d", &g.lo, &g.hi, &g.steps) != 3 ||
        g.steps < 2 || !(g.hi > g.lo))
        throw std::invalid_argument("grid must be lo:hi:steps with steps >= 2, hi > lo");
    return g;
}

std::vector<double> linear_grid(const GridSpec& g) {
    std::vector<double> xs(g.steps);
    for (int i = 0; i < g.steps; ++i)
        xs[i] = g.lo + (g.hi - g.lo) * i / (g.steps - 1);
    return xs;
}

int default_threads() {
    if (const char* env = std::getenv("DPKDE_THREADS")) {
        const int t = std::atoi(env);
        if (t > 0) return t;
    }
    return 0;  // library resolves to hardware concurrency
}

void echo_config(const std::string& text) { std::cerr << "[dpkde] " << text << "\n"; }

// ---- subcommand bodies ----

int run_constants(const std::string& kernel_name, bool l2nr, const std::string& dist_name) {
    const dpkde::Kernel k = parse_kernel(kernel_name);
    if (l2nr) {
        const dpkde::DistanceSpec d = parse_distance(dist_name);
        echo_config("constants --l2nr kernel=" + k.name() + " distance=" + d.label());
        const dpkde::L2nrConstant c = dpkde::l2nr_constant(k, d);
        std::printf("c      %.6g\n", c.c);
        std::printf("gamma  %.6g\n", c.gamma);
        return 0;
    }
    echo_config("constants kernel=" + k.name());
    std::printf("name       %s\n", k.name().c_str());
    std::printf("order      %d\n", k.order());
    std::printf("k_ell      %.6g\n", k.moment_ell());
    std::printf("l1_norm    %.6g\n", k.l1_norm());
    std::printf("l2_norm_sq %.6g\n", k.l2_norm_sq());
    std::printf("kappa0     %.6g\n", k.kappa0());
    return 0;
}

int run_select(const std::string& data_path, const std::string& kernel_name,
               const std::string& dist_name, const std::string& thr_name,
               const std::string& rule_name) {
    const dpkde::Kernel k = parse_kernel(kernel_name);
    const dpkde::DistanceSpec d = parse_distance(dist_name);
    const dpkde::ThresholdSpec t = parse_threshold(thr_name, k, d);
    dpkde::RootRule rule = dpkde::RootRule::first;
    if (rule_name == "smallest") rule = dpkde::RootRule::smallest;
    else if (rule_name == "largest") rule = dpkde::RootRule::largest;
    else if (rule_name != "first") throw std::invalid_argument("rule must be first|smallest|largest");

    echo_config("select data=" + data_path + " kernel=" + k.name() + " distance=" +
                d.label() + " threshold=" + t.label() + " rule=" + rule_name);
    const dpkde::Sample sample(read_data_file(data_path));
    const dpkde::SelectionResult r = dpkde::select_bandwidth(sample, k, d, t, rule);
    std::printf("h=%.12g s=%.12g d=%.12g iters=%d\n", r.bandwidth, r.threshold_value,
                r.achieved_distance, r.iterations);
    return 0;
}

int run_profile(const std::string& data_path, const std::string& kernel_name,
                const std::string& dist_name, const std::string& grid_text) {
    const dpkde::Kernel k = parse_kernel(kernel_name);
    const dpkde::DistanceSpec d = parse_distance(dist_name);
    const GridSpec g = parse_grid(grid_text);
    echo_config("profile data=" + data_path + " kernel=" + k.name() + " distance=" +
                d.label() + " grid=" + grid_text);
    const dpkde::Sample sample(read_data_file(data_path));
    const std::vector<double> grid = linear_grid(g);
    const std::vector<double> prof = dpkde::distance_profile(sample, k, d, grid);
    std::printf("h,distance\n");
    for (std::size_t i = 0; i < grid.size(); ++i)
        std::printf("%.17g,%.17g\n", grid[i], prof[i]);
    return 0;
}

int run_lscv(const std::string& data_path, const std::string& kernel_name,
             const std::string& grid_text, bool emit_curve) {
    const dpkde::Kernel k = parse_kernel(kernel_name);
    dpkde::LscvGrid grid;
    if (!grid_text.empty()) {
        const GridSpec g = parse_grid(grid_text);
        grid.lo = g.lo;
        grid.hi = g.hi;
        grid.points = g.steps;
        grid.auto_extend = false;
    }
    echo_config("lscv data=" + data_path + " kernel=" + k.name() +
                (grid_text.empty() ? std::string(" grid=default") : " grid=" + grid_text));
    const dpkde::Sample sample(read_data_file(data_path));
    const dpkde::LscvResult r = dpkde::lscv_select(sample, k, grid, emit_curve);
    if (emit_curve) {
        std::printf("h,score\n");
        for (const auto& [h, score] : r.criterion_curve)
            std::printf("%.17g,%.17g\n", h, score);
    }
    std::printf("h=%.12g\n", r.bandwidth);
    return 0;
}

int run_density(const std::string& id, const std::string& emit, const std::string& grid_text,
                long sample_n, std::uint64_t seed) {
    const dpkde::DensityRegistry registry;
    const dpkde::DensityModel& m = registry.get(id);
    if (sample_n > 0) {
        echo_config("density id=" + id + " sample=" + std::to_string(sample_n) +
                    " seed=" + std::to_string(seed));
        dpkde::SplitMix64 rng(seed);
        for (long i = 0; i < sample_n; ++i) std::printf("%.17g\n", m.sampler(rng));
        return 0;
    }
    if (emit != "pdf" && emit != "cdf")
        throw std::invalid_argument("density needs --emit pdf|cdf or --sample N");
    const GridSpec g = parse_grid(grid_text);
    echo_config("density id=" + id + " emit=" + emit + " grid=" + grid_text);
    std::printf("x,%s\n", emit.c_str());
    for (double x : linear_grid(g))
        std::printf("%.17g,%.17g\n", x, emit == "pdf" ? m.pdf(x) : m.cdf(x));
    return 0;
}

dpkde::StudyConfig load_study_config(const std::string& path, std::uint64_t seed_override,
                                     bool seed_given, int threads) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("config parse error: " + std::string(e.what()));
    }

    dpkde::StudyConfig cfg;
    cfg.kernel = parse_kernel(j.value("kernel", std::string("epanechnikov")));
    if (!j.contains("densities")) throw std::invalid_argument("config needs 'densities'");
    for (const auto& d : j.at("densities")) cfg.densities.push_back(d.get<std::string>());
    if (j.contains("sample_sizes")) {
        cfg.sample_sizes.clear();
        for (const auto& n : j.at("sample_sizes")) cfg.sample_sizes.push_back(n.get<std::int64_t>());
    }
    cfg.replicates = j.value("replicates", 250);
    cfg.master_seed = j.value("master_seed", std::uint64_t{1});
    if (j.contains("methods")) {
        for (const auto& m : j.at("methods")) {
            if (m.is_string()) {
                cfg.methods.push_back(
                    dpkde::MethodSpec::from_label(m.get<std::string>(), cfg.kernel));
            } else {
                const auto label = m.at("label").get<std::string>();
                const auto dist = parse_distance(m.value("distance", std::string("kolmogorov")));
                dpkde::ThresholdSpec thr =
                    m.contains("threshold") && m.at("threshold").is_string()
                        ? parse_threshold(m.at("threshold").get<std::string>(), cfg.kernel, dist)
                        : dpkde::ThresholdSpec::power_law(m.at("c").get<double>(),
                                                          m.at("gamma").get<double>(), label);
                dpkde::RootRule rule = dpkde::RootRule::first;
                const std::string r = m.value("rule", std::string("first"));
                if (r == "smallest") rule = dpkde::RootRule::smallest;
                else if (r == "largest") rule = dpkde::RootRule::largest;
                cfg.methods.push_back(dpkde::MethodSpec::discrepancy(label, dist, thr, rule));
            }
        }
    } else {
        cfg.methods = dpkde::default_methods(cfg.kernel);
    }
    if (seed_given) cfg.master_seed = seed_override;
    cfg.threads = threads;
    return cfg;
}

int run_study_cmd(const std::string& config_path, const std::string& out_dir,
                  std::uint64_t seed_override, bool seed_given, int threads) {
    const dpkde::StudyConfig cfg =
        load_study_config(config_path, seed_override, seed_given, threads);
    {
        std::ostringstream ss;
        ss << "study config=" << config_path << " out=" << out_dir
           << " seed=" << cfg.master_seed << " threads=" << cfg.threads
           << " densities=";
        for (const auto& d : cfg.densities) ss << d << " ";
        echo_config(ss.str());
    }

    const dpkde::DensityRegistry registry;
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<dpkde::StudyCell> cells = dpkde::run_study(cfg, registry);
    const auto t1 = std::chrono::steady_clock::now();
    const double seconds = std::chrono::duration<double>(t1 - t0).count();

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir);

    auto write_file = [&](const std::string& name, auto writer) {
        std::ofstream os(out_dir + "/" + name, std::ios::binary);
        if (!os) throw IoError("cannot write " + out_dir + "/" + name);
        writer(os);
    };
    write_file("table_l1.csv", [&](std::ostream& os) {
        dpkde::emit_table(cells, cfg, dpkde::TableKind::l1, os);
    });
    write_file("table_l2.csv", [&](std::ostream& os) {
        dpkde::emit_table(cells, cfg, dpkde::TableKind::l2, os);
    });
    write_file("table_bw.csv", [&](std::ostream& os) {
        dpkde::emit_table(cells, cfg, dpkde::TableKind::bandwidth, os);
    });
    write_file("study_cells.csv", [&](std::ostream& os) { dpkde::emit_cells_csv(cells, os); });

    json meta;
    meta["master_seed"] = cfg.master_seed;
    meta["replicates"] = cfg.replicates;
    meta["densities"] = cfg.densities;
    meta["sample_sizes"] = cfg.sample_sizes;
    meta["kernel"] = cfg.kernel.name();
    std::vector<std::string> labels;
    for (const auto& m : cfg.methods) labels.push_back(m.label);
    meta["methods"] = labels;
    meta["threads_requested"] = cfg.threads;
    meta["seconds"] = seconds;
    meta["version"] = "dpkde 0.1.0";
    write_file("study_meta.json", [&](std::ostream& os) { os << meta.dump(2) << "\n"; });

    std::printf("wrote %s/table_l1.csv table_l2.csv table_bw.csv study_cells.csv "
                "study_meta.json (%.1fs)\n",
                out_dir.c_str(), seconds);
    return 0;
}

int run_verify() {
    echo_config("verify");
    int failures = 0;
    auto report = [&](const std::string& name, bool ok, const std::string& detail) {
        std::printf("%-44s %s  %s\n", name.c_str(), ok ? "PASS" : "FAIL", detail.c_str());
        if (!ok) ++failures;
    };

    // Peaked-family smoothing bias: closed form vs numeric convolution.
    {
        const dpkde::Kernel k = dpkde::Kernel::epanechnikov();
        bool ok = true;
        double worst = 0.0;
        for (double eps : {0.2, 0.3, 0.4}) {
            for (double h : {0.01, 0.001}) {
                const double closed = dpkde::example1_bias_constant(eps) * std::pow(h, eps);
                const auto conv = dpkde::integrate(
                    [&](double u) {
                        const double arg = h * (1.0 - u);
                        const double F = arg >= 1.0 ? 1.0 : std::pow(arg, eps);
                        return F * k.eval(u);
                    },
                    -1.0, 1.0, 1e-13, 1e-13);
                const double numeric = std::pow(h, eps) - conv.value;
                const double rel = std::abs(numeric - closed) / closed;
                worst = std::max(worst, rel);
                ok = ok && rel <= 1e-4;
            }
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), "max rel err %.2e", worst);
        report("peaked-family bias constant", ok, buf);
    }

    // Normal-reference constants.
    {
        const dpkde::DistanceSpec kolm = dpkde::DistanceSpec::kolmogorov();
        const dpkde::DistanceSpec kuip = dpkde::DistanceSpec::kuiper(1);
        const struct {
            dpkde::Kernel k;
            const dpkde::DistanceSpec* d;
            double expected;
        } cases[] = {
            {dpkde::Kernel::epanechnikov(), &kolm, 0.1331},
            {dpkde::Kernel::gaussian(), &kolm, 0.1357},
            {dpkde::Kernel::epanechnikov(), &kuip, 0.2661},
            {dpkde::Kernel::gaussian(), &kuip, 0.2715},
        };
        bool ok = true;
        double worst = 0.0;
        for (const auto& c : cases) {
            const double got = dpkde::l2nr_constant(c.k, *c.d).c;
            worst = std::max(worst, std::abs(got - c.expected));
            ok = ok && std::abs(got - c.expected) <= 5e-4;
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), "max abs err %.2e", worst);
        report("normal-reference constants", ok, buf);
    }

    // Bracket bounds of the discrepancy profile.
    {
        dpkde::SplitMix64 rng(20120808);
        std::vector<double> draws(50);
        for (double& x : draws) x = rng.normal();
        const dpkde::Sample sample(std::move(draws));
        const dpkde::Kernel k = dpkde::Kernel::epanechnikov();
        const auto n = static_cast<double>(sample.size());
        bool ok = true;
        for (const auto& d : {dpkde::DistanceSpec::kolmogorov(), dpkde::DistanceSpec::kuiper(1)}) {
            const double grid[2] = {1e-9, 1e6 * sample.range()};
            const auto prof = dpkde::distance_profile(sample, k, d, grid);
            ok = ok && prof[0] <= d.c_d() * k.kappa0() / n + 1e-6;
            ok = ok && prof[1] >= k.kappa0() - 1e-3;
        }
        report("discrepancy profile bracket bounds", ok, "");
    }

    std::printf("%s\n", failures == 0 ? "all checks passed" : "CHECKS FAILED");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernel density estimation with discrepancy-principle bandwidth selection"};
    app.require_subcommand(1);

    std::string kernel_name = "epanechnikov", dist_name = "kolmogorov";
    std::string data_path, thr_name, rule_name = "first", grid_text, emit_text, id_text;
    std::string config_path, out_dir = ".";
    bool l2nr = false, emit_curve = false;
    long sample_n = 0;
    std::uint64_t seed = 1;
    bool seed_given = false;
    int threads = default_threads();

    auto* c_constants = app.add_subcommand("constants", "Kernel and threshold constants");
    c_constants->add_option("--kernel", kernel_name, "epanechnikov|gaussian");
    c_constants->add_flag("--l2nr", l2nr, "print the normal-reference (c, gamma)");
    c_constants->add_option("--distance", dist_name, "kolmogorov|kuiper:k");

    auto* c_select = app.add_subcommand("select", "Solve d(F_n, Fhat^h) = s(n) for h");
    c_select->add_option("--data", data_path, "one float per line; # comments")->required();
    c_select->add_option("--kernel", kernel_name, "epanechnikov|gaussian");
    c_select->add_option("--distance", dist_name, "kolmogorov|kuiper:k");
    c_select->add_option("--threshold", thr_name, "V|ELR|KS50|KS95|KUIP50|KUIP95|L2NR|LIL[:eps]|c,gamma")
        ->required();
    c_select->add_option("--rule", rule_name, "first|smallest|largest");

    auto* c_profile = app.add_subcommand("profile", "CSV of h -> d(F_n, Fhat^h)");
    c_profile->add_option("--data", data_path)->required();
    c_profile->add_option("--kernel", kernel_name);
    c_profile->add_option("--distance", dist_name);
    c_profile->add_option("--grid", grid_text, "lo:hi:steps")->required();

    auto* c_lscv = app.add_subcommand("lscv", "Least-squares cross-validation bandwidth");
    c_lscv->add_option("--data", data_path)->required();
    c_lscv->add_option("--kernel", kernel_name);
    c_lscv->add_option("--grid", grid_text, "lo:hi:steps (default: range/n to range)");
    c_lscv->add_flag("--emit-curve", emit_curve, "print the criterion curve");

    auto* c_density = app.add_subcommand("density", "Benchmark density tables and samples");
    c_density->add_option("--id", id_text, "11|6|8|19")->required();
    c_density->add_option("--emit", emit_text, "pdf|cdf");
    c_density->add_option("--grid", grid_text, "lo:hi:steps");
    c_density->add_option("--sample", sample_n, "emit N draws instead");
    c_density->add_option("--seed", seed, "sampler seed");

    auto* c_study = app.add_subcommand("study", "Monte Carlo simulation study");
    c_study->add_option("--config", config_path, "JSON config")->required();
    c_study->add_option("--out", out_dir, "output directory");
    c_study->add_option("--seed", seed, "override the config master seed")
        ->each([&](const std::string&) { seed_given = true; });
    c_study->add_option("--threads", threads, "worker threads (default: DPKDE_THREADS or hardware)");

    auto* c_verify = app.add_subcommand("verify", "Analytic self-checks");
    (void)c_verify;

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_constants->parsed()) return run_constants(kernel_name, l2nr, dist_name);
        if (c_select->parsed())
            return run_select(data_path, kernel_name, dist_name, thr_name, rule_name);
        if (c_profile->parsed())
            return run_profile(data_path, kernel_name, dist_name, grid_text);
        if (c_lscv->parsed()) return run_lscv(data_path, kernel_name, grid_text, emit_curve);
        if (c_density->parsed())
            return run_density(id_text, emit_text, grid_text, sample_n, seed);
        if (c_study->parsed())
            return run_study_cmd(config_path, out_dir, seed, seed_given, threads);
        if (c_verify->parsed()) return run_verify();
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
