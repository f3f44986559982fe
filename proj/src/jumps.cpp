#include "ecorisk/jumps.hpp"

#include <cmath>
#include <stdexcept>

namespace ecorisk {

std::vector<double> sample_hpp(double lambda, double horizon, Rng& rng) {
    std::vector<double> times;
    if (lambda <= 0.0) return times;
    double t = rng.exponential(lambda);
    while (t <= horizon) {
        times.push_back(t);
        t += rng.exponential(lambda);
    }
    return times;
}

void thin_step_into(double p_current, double t, double dt, double majorant_rate,
                    const ModelParams& params, Rng& rng, std::vector<double>& out) {
    out.clear();
    if (majorant_rate <= 0.0) return;
    const double rate = total_event_rate(p_current, params);
    if (rate > majorant_rate)
        throw std::runtime_error("thin_step: majorant rate violated (rate " +
                                 std::to_string(rate) + " > majorant " +
                                 std::to_string(majorant_rate) + ")");
    const double accept = rate / majorant_rate;
    double s = rng.exponential(majorant_rate);
    while (s <= dt) {
        if (rng.uniform() < accept) out.push_back(t + s);
        s += rng.exponential(majorant_rate);
    }
}

std::vector<double> thin_step(double p_current, double t, double dt, double majorant_rate,
                              const ModelParams& params, Rng& rng) {
    std::vector<double> out;
    thin_step_into(p_current, t, dt, majorant_rate, params, rng, out);
    return out;
}

double sample_mark(double p, const MarkModel& marks, const ModelParams& params, Rng& rng) {
    switch (marks.kind) {
        case MarkKind::None:
            throw std::invalid_argument("sample_mark: mark model is NONE");
        case MarkKind::Gamma:
            return rng.gamma(p);
        case MarkKind::Discrete: {
            double total = 0.0;
            for (std::size_t i = 0; i < marks.atoms.size(); ++i)
                total += intensity_marked(p, marks.atoms[i], params) * marks.weights[i];
            if (total <= 0.0)
                throw std::runtime_error("sample_mark: total mark weight is zero");
            double u = rng.uniform() * total;
            for (std::size_t i = 0; i < marks.atoms.size(); ++i) {
                u -= intensity_marked(p, marks.atoms[i], params) * marks.weights[i];
                if (u <= 0.0) return marks.atoms[i];
            }
            return marks.atoms.back();
        }
    }
    throw std::logic_error("sample_mark: unreachable");
}

double compensator_integral(const std::vector<double>& pollution, double dt,
                            const ModelParams& params) {
    if (pollution.size() < 2) return 0.0;
    double sum = 0.5 * (total_event_rate(pollution.front(), params) +
                        total_event_rate(pollution.back(), params));
    for (std::size_t i = 1; i + 1 < pollution.size(); ++i)
        sum += total_event_rate(pollution[i], params);
    return sum * dt;
}

}  // namespace ecorisk
