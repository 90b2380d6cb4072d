#include "dpkde/quadrature.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace dpkde {

namespace {

// Gauss-Kronrod 7-15 abscissae and weights on [-1,1] (QUADPACK dqk15).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

double sharpen_error(double raw, double value) {
    double err = std::abs(raw);
    if (err > 0.0) {
        const double scaled =
            std::pow(200.0 * err / std::max(std::abs(value), 1e-300), 1.5);
        if (scaled < 1.0) err *= scaled;
    }
    return err;
}

}  // namespace

void gk15_nodes(double a, double b, double* xs) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int j = 0; j < 7; ++j) xs[j] = center - half * kXgk[j];
    xs[7] = center;
    for (int j = 0; j < 7; ++j) xs[14 - j] = center + half * kXgk[j];
}

QuadResult gk15_combine(const double* f, double a, double b) {
    const double half = 0.5 * (b - a);
    double kronrod = f[7] * kWgk[7];
    double gauss = f[7] * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double pair = f[j] + f[14 - j];
        kronrod += kWgk[j] * pair;
        if (j % 2 == 1) gauss += kWg[j / 2] * pair;
    }
    QuadResult r;
    r.value = kronrod * half;
    r.error = sharpen_error((kronrod - gauss) * half, r.value);
    return r;
}

QuadResult gauss_kronrod_15(const std::function<double(double)>& f, double a, double b) {
    double xs[15], fv[15];
    gk15_nodes(a, b, xs);
    for (int i = 0; i < 15; ++i) fv[i] = f(xs[i]);
    return gk15_combine(fv, a, b);
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol, double rel_tol, int max_depth) {
    if (a == b) return {0.0, 0.0};

    struct Panel {
        double a, b;
        QuadResult q;
        int depth;
    };

    std::vector<Panel> panels;
    panels.push_back({a, b, gauss_kronrod_15(f, a, b), 0});
    double total = panels[0].q.value;
    double total_err = panels[0].q.error;

    while (total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
        std::size_t worst = 0;
        for (std::size_t i = 1; i < panels.size(); ++i)
            if (panels[i].q.error > panels[worst].q.error) worst = i;
        Panel p = panels[worst];
        if (p.depth >= max_depth || p.q.error == 0.0) break;

        const double mid = 0.5 * (p.a + p.b);
        if (mid <= p.a || mid >= p.b) break;  // interval exhausted in doubles
        Panel left{p.a, mid, gauss_kronrod_15(f, p.a, mid), p.depth + 1};
        Panel right{mid, p.b, gauss_kronrod_15(f, mid, p.b), p.depth + 1};

        total += left.q.value + right.q.value - p.q.value;
        total_err += left.q.error + right.q.error - p.q.error;
        panels[worst] = left;
        panels.push_back(right);
        if (panels.size() > 4096) break;
    }

    // Fixed-order resummation keeps the result deterministic.
    double value = 0.0, err = 0.0;
    for (const Panel& p : panels) {
        value += p.q.value;
        err += p.q.error;
    }
    return {value, err};
}

}  // namespace dpkde
