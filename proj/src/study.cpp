#include "dpkde/study.hpp"

#include <algorithm>
#include <cctype>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "dpkde/lscv.hpp"
#include "dpkde/normal.hpp"
#include "dpkde/risk.hpp"
#include "dpkde/rng.hpp"

namespace dpkde {

namespace {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static task split; each worker owns a deterministic slot range, results
// land in preallocated slots, so output is independent of scheduling.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn) {
    threads = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

struct ReplicateOutcome {
    double h = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
    bool has_l2 = false;
    bool ok = false;
};

struct MeanSe {
    double mean = 0.0, se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe r;
    if (xs.empty()) return r;
    double sum = 0.0;
    for (double x : xs) sum += x;
    r.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - r.mean) * (x - r.mean);
        r.se = std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0) /
                         static_cast<double>(xs.size()));
    }
    return r;
}

// Paper-style table entry: rounded to 4 decimals, trailing zeros trimmed.
std::string table_value(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", x);
    std::string s(buf);
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    return s;
}

std::string full_value(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

double numeric_derivative_distance(const DensityModel& model, const DistanceSpec& dist) {
    const double a = model.tail_interval.lo, b = model.tail_interval.hi;
    const int m = 1 << 13;
    const double delta = (b - a) / (1 << 24);
    std::vector<double> vals(m + 3, 0.0);
    for (int i = 0; i <= m; ++i) {
        const double x = a + (b - a) * i / m;
        vals[static_cast<std::size_t>(i) + 1] =
            (model.pdf(x + delta) - model.pdf(x - delta)) / (2.0 * delta);
    }
    if (dist.kind() == DistanceSpec::Kind::kolmogorov) {
        double best = 0.0;
        for (double v : vals) best = std::max(best, std::abs(v));
        return best;
    }
    return detail::max_k_interval_sum(vals, dist.kuiper_order());
}

}  // namespace

MethodSpec MethodSpec::lscv() {
    MethodSpec m;
    m.label = "L2CV";
    m.is_lscv = true;
    return m;
}

MethodSpec MethodSpec::discrepancy(std::string label, DistanceSpec d, ThresholdSpec t,
                                   RootRule rule) {
    MethodSpec m;
    m.label = std::move(label);
    m.is_lscv = false;
    m.dist = d;
    m.threshold = std::move(t);
    m.rule = rule;
    return m;
}

MethodSpec MethodSpec::from_label(std::string_view label, const Kernel& kernel) {
    std::string l(label);
    std::transform(l.begin(), l.end(), l.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    if (l == "L2CV" || l == "LSCV") return lscv();
    if (l == "L2NR")
        return discrepancy("L2NR", DistanceSpec::kolmogorov(),
                           l2nr_spec(kernel, DistanceSpec::kolmogorov()));
    const ThresholdSpec t = preset(label);
    return discrepancy(t.label(), preset_distance(label), t);
}

std::vector<MethodSpec> default_methods(const Kernel& kernel) {
    std::vector<MethodSpec> out;
    for (const char* l : {"L2CV", "ELR", "V", "KS50", "KS95", "KUIP50", "KUIP95", "L2NR"})
        out.push_back(MethodSpec::from_label(l, kernel));
    return out;
}

std::vector<StudyCell> run_study(const StudyConfig& cfg, const DensityRegistry& reg) {
    if (cfg.densities.empty()) throw std::invalid_argument("study needs densities");
    if (cfg.methods.empty()) throw std::invalid_argument("study needs methods");
    if (cfg.replicates < 1) throw std::invalid_argument("study needs replicates >= 1");
    for (const auto& id : cfg.densities) reg.get(id);  // validate upfront

    const std::size_t nd = cfg.densities.size();
    const std::size_t nn = cfg.sample_sizes.size();
    const std::size_t nm = cfg.methods.size();
    const auto reps = static_cast<std::size_t>(cfg.replicates);

    // slot layout: ((d * nn + s) * reps + r) * nm + m
    std::vector<ReplicateOutcome> slots(nd * nn * reps * nm);

    parallel_for(nd * nn * reps, cfg.threads, [&](std::size_t task) {
        const std::size_t r = task % reps;
        const std::size_t s_idx = (task / reps) % nn;
        const std::size_t d_idx = task / (reps * nn);
        const DensityModel& model = reg.get(cfg.densities[d_idx]);
        const std::int64_t n = cfg.sample_sizes[s_idx];

        SplitMix64 rng(derive_seed(cfg.master_seed, model.id,
                                   static_cast<std::uint64_t>(n), r));
        std::vector<double> draws(static_cast<std::size_t>(n));
        for (double& x : draws) x = model.sampler(rng);
        const Sample sample(std::move(draws));

        for (std::size_t m = 0; m < nm; ++m) {
            ReplicateOutcome& out = slots[task * nm + m];
            const MethodSpec& method = cfg.methods[m];
            double h = 0.0;
            try {
                if (method.is_lscv) {
                    h = lscv_select(sample, cfg.kernel).bandwidth;
                } else {
                    h = select_bandwidth(sample, cfg.kernel, method.dist,
                                         method.threshold, method.rule)
                            .bandwidth;
                }
            } catch (const std::exception&) {
                continue;  // recorded as a failure of this replicate
            }
            const RiskValue risk = evaluate_risk(sample, cfg.kernel, h, model);
            out.ok = true;
            out.h = h;
            out.l1 = risk.l1;
            if (risk.l2sq) {
                out.has_l2 = true;
                out.l2 = *risk.l2sq;
            }
        }
    });

    std::vector<StudyCell> cells;
    cells.reserve(nd * nn * nm);
    std::vector<std::string> dead_cells;
    for (std::size_t d = 0; d < nd; ++d) {
        for (std::size_t s_idx = 0; s_idx < nn; ++s_idx) {
            for (std::size_t m = 0; m < nm; ++m) {
                StudyCell cell;
                cell.density_id = cfg.densities[d];
                cell.n = cfg.sample_sizes[s_idx];
                cell.method_label = cfg.methods[m].label;
                std::vector<double> hs, l1s, l2s;
                for (std::size_t r = 0; r < reps; ++r) {
                    const std::size_t task = (d * nn + s_idx) * reps + r;
                    const ReplicateOutcome& out = slots[task * nm + m];
                    if (!out.ok) {
                        ++cell.failures;
                        continue;
                    }
                    hs.push_back(out.h);
                    l1s.push_back(out.l1);
                    if (out.has_l2) l2s.push_back(out.l2);
                }
                cell.successes = static_cast<int>(hs.size());
                const MeanSe mh = mean_se(hs), ml1 = mean_se(l1s);
                cell.mean_bandwidth = mh.mean;
                cell.se_bandwidth = mh.se;
                cell.mean_l1 = ml1.mean;
                cell.se_l1 = ml1.se;
                if (!l2s.empty()) {
                    const MeanSe ml2 = mean_se(l2s);
                    cell.mean_l2sq = ml2.mean;
                    cell.se_l2sq = ml2.se;
                }
                if (cell.successes == 0)
                    dead_cells.push_back(cell.density_id + "/n=" + std::to_string(cell.n) +
                                         "/" + cell.method_label);
                cells.push_back(std::move(cell));
            }
        }
    }
    if (!dead_cells.empty()) {
        std::string msg = "study cells with no successful replicate:";
        for (const auto& c : dead_cells) msg += " " + c;
        throw std::runtime_error(msg);
    }
    return cells;
}

void emit_table(std::span<const StudyCell> cells, const StudyConfig& cfg,
                TableKind kind, std::ostream& os) {
    os << "density,n";
    for (const auto& m : cfg.methods) os << "," << m.label;
    os << "\n";
    for (const auto& d : cfg.densities) {
        for (const auto n : cfg.sample_sizes) {
            std::vector<std::string> row;
            bool any = false;
            for (const auto& m : cfg.methods) {
                const auto it = std::find_if(cells.begin(), cells.end(), [&](const StudyCell& c) {
                    return c.density_id == d && c.n == n && c.method_label == m.label;
                });
                if (it == cells.end()) {
                    row.push_back("");
                    continue;
                }
                switch (kind) {
                    case TableKind::l1:
                        row.push_back(table_value(it->mean_l1));
                        any = true;
                        break;
                    case TableKind::l2:
                        if (it->mean_l2sq) {
                            row.push_back(table_value(*it->mean_l2sq));
                            any = true;
                        } else {
                            row.push_back("");
                        }
                        break;
                    case TableKind::bandwidth:
                        row.push_back(table_value(it->mean_bandwidth));
                        any = true;
                        break;
                }
            }
            if (!any) continue;  // L2 table omits non-square-integrable densities
            os << d << "," << n;
            for (const auto& v : row) os << "," << v;
            os << "\n";
        }
    }
}

void emit_cells_csv(std::span<const StudyCell> cells, std::ostream& os) {
    os << "density,n,method,mean_l1,se_l1,mean_l2sq,se_l2sq,mean_bandwidth,"
          "se_bandwidth,successes,failures\n";
    for (const auto& c : cells) {
        os << c.density_id << "," << c.n << "," << c.method_label << ","
           << full_value(c.mean_l1) << "," << full_value(c.se_l1) << ",";
        if (c.mean_l2sq) os << full_value(*c.mean_l2sq) << "," << full_value(*c.se_l2sq);
        else os << ",";
        os << "," << full_value(c.mean_bandwidth) << "," << full_value(c.se_bandwidth)
           << "," << c.successes << "," << c.failures << "\n";
    }
}

RateDiagnostic rate_diagnostic(const DensityModel& model, const Kernel& kernel,
                               const DistanceSpec& dist, const ThresholdSpec& thr,
                               std::span<const std::int64_t> n_grid, int replicates,
                               std::uint64_t master_seed, int threads) {
    if (n_grid.size() < 3)
        throw std::domain_error("rate diagnostic needs at least 3 grid points");
    if (!thr.is_power_law())
        throw std::domain_error("rate diagnostic needs a power-law threshold");
    if (replicates < 1) throw std::domain_error("rate diagnostic needs replicates >= 1");

    RateDiagnostic diag;
    diag.n_grid.assign(n_grid.begin(), n_grid.end());
    diag.mean_bandwidth.resize(n_grid.size());

    const auto reps = static_cast<std::size_t>(replicates);
    std::vector<double> hs(n_grid.size() * reps, 0.0);
    parallel_for(n_grid.size() * reps, threads, [&](std::size_t task) {
        const std::size_t gi = task / reps;
        const std::size_t r = task % reps;
        const std::int64_t n = n_grid[gi];
        SplitMix64 rng(derive_seed(master_seed, model.id,
                                   static_cast<std::uint64_t>(n), r));
        std::vector<double> draws(static_cast<std::size_t>(n));
        for (double& x : draws) x = model.sampler(rng);
        const Sample sample(std::move(draws));
        hs[task] = select_bandwidth(sample, kernel, dist, thr).bandwidth;
    });

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
        double mean = 0.0;
        for (std::size_t r = 0; r < reps; ++r) mean += hs[gi * reps + r];
        mean /= static_cast<double>(reps);
        diag.mean_bandwidth[gi] = mean;
        const double lx = std::log(static_cast<double>(n_grid[gi]));
        const double ly = std::log(mean);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const auto g = static_cast<double>(n_grid.size());
    diag.slope = (g * sxy - sx * sy) / (g * sxx - sx * sx);

    const PowerLawForm& pw = *thr.power_law_form();
    const int ell = kernel.order();
    diag.gamma_over_ell = pw.gamma / ell;
    double dval = 0.0;
    if (model.id == "11" && ell == 2) {
        const double phi1 = normal_pdf(1.0);
        dval = dist.kind() == DistanceSpec::Kind::kolmogorov
                   ? phi1
                   : (dist.kuiper_order() == 1 ? 2.0 * phi1 : 0.0);
    }
    if (dval == 0.0 && model.singularities.empty())
        dval = numeric_derivative_distance(model, dist);
    if (dval > 0.0 && std::isfinite(dval) && kernel.moment_ell() != 0.0) {
        double fact = 1.0;
        for (int i = 2; i <= ell; ++i) fact *= i;
        diag.predicted_constant =
            std::pow(pw.c * fact / (kernel.moment_ell() * dval), 1.0 / ell);
    }
    return diag;
}

}  // namespace dpkde
