#pragma once

#include <cstddef>
#include <vector>

#include "ecorisk/model.hpp"

namespace ecorisk {

// Rectangular log-spaced grid on [k_lo,k_hi] x [p_lo,p_hi]. Both state
// processes are multiplicative, so uniform spacing in log coordinates
// resolves the small-K region that damaging jumps land in.
struct Grid {
    int n_k = 0;
    int n_p = 0;
    std::vector<double> K;  // nodes, strictly increasing
    std::vector<double> P;
    double x_lo = 0.0, hx = 0.0;  // log-K origin and spacing
    double y_lo = 0.0, hy = 0.0;  // log-P origin and spacing

    static Grid log_spaced(double k_lo, double k_hi, int n_k, double p_lo, double p_hi, int n_p);

    std::size_t size() const { return static_cast<std::size_t>(n_k) * n_p; }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_p + j; }

    // Interior band excluding `margin_frac` of the nodes on each side of
    // both axes (e.g. 0.2 keeps the central 60%).
    void interior_range(double margin_frac, int& i_lo, int& i_hi, int& j_lo, int& j_hi) const;
};

// Grid-sampled value function with bilinear interpolation in log
// coordinates; queries outside the box extrapolate linearly using the
// one-sided boundary gradient of the log-transformed field.
struct ValueField {
    Grid grid;
    std::vector<double> v;

    ValueField() = default;
    explicit ValueField(const Grid& g) : grid(g), v(g.size(), 0.0) {}

    double& at(int i, int j) { return v[grid.idx(i, j)]; }
    double at(int i, int j) const { return v[grid.idx(i, j)]; }

    double value_at(double K, double P) const;

    // Central second-order gradients on the uniform log mesh (interior
    // nodes; one-sided at the edges).
    double grad_K(int i, int j) const;
    double grad_P(int i, int j) const;
    double second_P(int i, int j) const;
};

// Feedback controls sampled on the same grid.
struct PolicyField {
    Grid grid;
    std::vector<double> C;
    std::vector<double> theta;

    PolicyField() = default;
    explicit PolicyField(const Grid& g)
        : grid(g), C(g.size(), 0.0), theta(g.size(), 0.0) {}

    // Cell hint reused across consecutive lookups on a slowly moving path;
    // avoids the log() cell search in the simulation hot loop.
    struct Cursor {
        int i = -1;
        int j = -1;
    };

    // Bilinear in (K,P) inside the box. Outside in K the consumption scales
    // proportionally with K (the feedback rule is asymptotically linear in
    // capital), which keeps long simulated paths well behaved; P clamps.
    Control control_at(double K, double P) const;
    Control control_at(double K, double P, Cursor& cur) const;
};

}  // namespace ecorisk
