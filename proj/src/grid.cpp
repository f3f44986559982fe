#include "ecorisk/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecorisk {

Grid Grid::log_spaced(double k_lo, double k_hi, int n_k, double p_lo, double p_hi, int n_p) {
    if (!(k_lo > 0.0 && p_lo > 0.0 && k_hi > k_lo && p_hi > p_lo))
        throw std::invalid_argument("grid bounds must satisfy 0 < lo < hi");
    if (n_k < 16 || n_p < 16)
        throw std::invalid_argument("grid needs at least 16 nodes per axis");
    Grid g;
    g.n_k = n_k;
    g.n_p = n_p;
    g.x_lo = std::log(k_lo);
    g.y_lo = std::log(p_lo);
    g.hx = (std::log(k_hi) - g.x_lo) / (n_k - 1);
    g.hy = (std::log(p_hi) - g.y_lo) / (n_p - 1);
    g.K.resize(n_k);
    g.P.resize(n_p);
    for (int i = 0; i < n_k; ++i) g.K[i] = std::exp(g.x_lo + i * g.hx);
    for (int j = 0; j < n_p; ++j) g.P[j] = std::exp(g.y_lo + j * g.hy);
    g.K.front() = k_lo;
    g.K.back() = k_hi;
    g.P.front() = p_lo;
    g.P.back() = p_hi;
    return g;
}

void Grid::interior_range(double margin_frac, int& i_lo, int& i_hi, int& j_lo, int& j_hi) const {
    i_lo = static_cast<int>(std::floor(margin_frac * (n_k - 1)));
    i_hi = n_k - 1 - i_lo;
    j_lo = static_cast<int>(std::floor(margin_frac * (n_p - 1)));
    j_hi = n_p - 1 - j_lo;
}

namespace {

// Fractional index along a uniform log axis; values outside [0, n-1] signal
// extrapolation.
double frac_index(double value, double lo, double h) { return (std::log(value) - lo) / h; }

// 1-D sample with linear extrapolation from the boundary gradient.
double sample_line(const double* data, int n, std::ptrdiff_t stride, double fi) {
    if (fi <= 0.0) return data[0] + fi * (data[stride] - data[0]);
    if (fi >= n - 1)
        return data[(n - 1) * stride] +
               (fi - (n - 1)) * (data[(n - 1) * stride] - data[(n - 2) * stride]);
    const int i0 = static_cast<int>(fi);
    const double s = fi - i0;
    return (1.0 - s) * data[i0 * stride] + s * data[(i0 + 1) * stride];
}

}  // namespace

double ValueField::value_at(double K, double P) const {
    const double fi = frac_index(K, grid.x_lo, grid.hx);
    const double fj = frac_index(P, grid.y_lo, grid.hy);
    // Interpolate along K within the two bracketing P rows (or the
    // extrapolating pair), then along P.
    const int j0 = std::clamp(static_cast<int>(std::floor(fj)), 0, grid.n_p - 2);
    const double s = fj - j0;
    const double a = sample_line(v.data() + j0, grid.n_k, grid.n_p, fi);
    const double b = sample_line(v.data() + (j0 + 1), grid.n_k, grid.n_p, fi);
    return (1.0 - s) * a + s * b;
}

double ValueField::grad_K(int i, int j) const {
    double dvdx;
    if (i == 0)
        dvdx = (at(1, j) - at(0, j)) / grid.hx;
    else if (i == grid.n_k - 1)
        dvdx = (at(i, j) - at(i - 1, j)) / grid.hx;
    else
        dvdx = (at(i + 1, j) - at(i - 1, j)) / (2.0 * grid.hx);
    return dvdx / grid.K[i];
}

double ValueField::grad_P(int i, int j) const {
    double dvdy;
    if (j == 0)
        dvdy = (at(i, 1) - at(i, 0)) / grid.hy;
    else if (j == grid.n_p - 1)
        dvdy = (at(i, j) - at(i, j - 1)) / grid.hy;
    else
        dvdy = (at(i, j + 1) - at(i, j - 1)) / (2.0 * grid.hy);
    return dvdy / grid.P[j];
}

double ValueField::second_P(int i, int j) const {
    const int jc = std::clamp(j, 1, grid.n_p - 2);
    const double vyy = (at(i, jc + 1) - 2.0 * at(i, jc) + at(i, jc - 1)) / (grid.hy * grid.hy);
    const double vy = (at(i, jc + 1) - at(i, jc - 1)) / (2.0 * grid.hy);
    return (vyy - vy) / (grid.P[j] * grid.P[j]);
}

Control PolicyField::control_at(double K, double P) const {
    Cursor cur;
    return control_at(K, P, cur);
}

Control PolicyField::control_at(double K, double P, Cursor& cur) const {
    const auto& Ks = grid.K;
    const auto& Ps = grid.P;
    const double Kc = std::clamp(K, Ks.front(), Ks.back());
    const double Pc = std::clamp(P, Ps.front(), Ps.back());

    if (cur.i < 0) {
        cur.i = std::clamp(static_cast<int>(std::floor((std::log(Kc) - grid.x_lo) / grid.hx)), 0,
                           grid.n_k - 2);
        cur.j = std::clamp(static_cast<int>(std::floor((std::log(Pc) - grid.y_lo) / grid.hy)), 0,
                           grid.n_p - 2);
    }
    while (cur.i > 0 && Kc < Ks[cur.i]) --cur.i;
    while (cur.i < grid.n_k - 2 && Kc > Ks[cur.i + 1]) ++cur.i;
    while (cur.j > 0 && Pc < Ps[cur.j]) --cur.j;
    while (cur.j < grid.n_p - 2 && Pc > Ps[cur.j + 1]) ++cur.j;
    const int i0 = cur.i;
    const int j0 = cur.j;

    const double sx = std::clamp((Kc - Ks[i0]) / (Ks[i0 + 1] - Ks[i0]), 0.0, 1.0);
    const double sy = std::clamp((Pc - Ps[j0]) / (Ps[j0 + 1] - Ps[j0]), 0.0, 1.0);

    auto blend = [&](const std::vector<double>& f) {
        const double a = (1.0 - sx) * f[grid.idx(i0, j0)] + sx * f[grid.idx(i0 + 1, j0)];
        const double b = (1.0 - sx) * f[grid.idx(i0, j0 + 1)] + sx * f[grid.idx(i0 + 1, j0 + 1)];
        return (1.0 - sy) * a + sy * b;
    };

    Control ctrl;
    ctrl.C = blend(C);
    ctrl.theta = blend(theta);
    if (K != Kc) ctrl.C *= K / Kc;  // keep the consumption share beyond the K range
    return ctrl;
}

}  // namespace ecorisk
