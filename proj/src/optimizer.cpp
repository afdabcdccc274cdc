#include "nst/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "nst/error.hpp"
#include "nst/tensor.hpp"

namespace nst {

namespace {

struct Sample {
    double step = 0.0;
    double loss = 0.0;
    double slope = 0.0;  // directional derivative along the search direction
    std::vector<double> x;
    std::vector<double> grad;
};

class LineFunction {
  public:
    LineFunction(const Objective& objective, std::span<const double> x, std::span<const double> direction)
        : objective_(objective), x_(x), d_(direction) {}

    Sample at(double step) {
        Sample s;
        s.step = step;
        s.x.resize(x_.size());
        s.grad.resize(x_.size());
        for (std::size_t i = 0; i < x_.size(); ++i) s.x[i] = x_[i] + step * d_[i];
        s.loss = objective_(s.x, s.grad);
        ++evaluations;
        if (!std::isfinite(s.loss) || !all_finite(s.grad)) {
            throw OptimizationError("objective is not finite at line-search step " + std::to_string(step));
        }
        s.slope = dot(s.grad, d_);
        return s;
    }

    int evaluations = 0;

  private:
    const Objective& objective_;
    std::span<const double> x_;
    std::span<const double> d_;
};

// Minimizer of the cubic matching values and slopes at a and b, if it exists.
std::optional<double> cubic_minimizer(const Sample& a, const Sample& b) {
    const double d1 = a.slope + b.slope - 3.0 * (a.loss - b.loss) / (a.step - b.step);
    const double disc = d1 * d1 - a.slope * b.slope;
    if (!(disc >= 0.0)) return std::nullopt;
    const double d2 = std::copysign(std::sqrt(disc), b.step - a.step);
    const double denom = b.slope - a.slope + 2.0 * d2;
    if (denom == 0.0) return std::nullopt;
    const double t = b.step - (b.step - a.step) * (b.slope + d2 - d1) / denom;
    if (!std::isfinite(t)) return std::nullopt;
    return t;
}

LineSearchResult finish(Sample s, int evaluations, bool armijo, bool curvature) {
    LineSearchResult r;
    r.step = s.step;
    r.loss = s.loss;
    r.x = std::move(s.x);
    r.grad = std::move(s.grad);
    r.evaluations = evaluations;
    r.armijo = armijo;
    r.curvature = curvature;
    return r;
}

}  // namespace

LineSearchResult strong_wolfe_line_search(const Objective& objective, std::span<const double> x, double loss0,
                                          std::span<const double> grad0, std::span<const double> direction,
                                          double initial_step, const LineSearchParams& params) {
    if (x.size() != direction.size() || x.size() != grad0.size()) {
        throw InvalidArgument("line search: vector lengths differ");
    }
    const double slope0 = dot(grad0, direction);
    if (!(slope0 < 0.0)) throw InvalidArgument("line search: direction is not a descent direction");
    if (!(initial_step > 0.0)) throw InvalidArgument("line search: initial step must be positive");

    LineFunction line(objective, x, direction);
    auto armijo = [&](const Sample& s) { return s.loss <= loss0 + params.c1 * s.step * slope0; };
    auto curvature = [&](const Sample& s) { return std::abs(s.slope) <= -params.c2 * slope0; };

    std::optional<Sample> best;  // lowest loss satisfying sufficient decrease
    auto note = [&](const Sample& s) {
        if (armijo(s) && (!best || s.loss < best->loss)) best = s;
    };
    auto give_up = [&]() {
        if (best) return finish(std::move(*best), line.evaluations, true, false);
        Sample origin{0.0, loss0, slope0, std::vector<double>(x.begin(), x.end()),
                      std::vector<double>(grad0.begin(), grad0.end())};
        return finish(std::move(origin), line.evaluations, false, false);
    };

    auto zoom = [&](Sample lo, Sample hi) -> LineSearchResult {
        while (line.evaluations < params.max_evaluations) {
            const double left = std::min(lo.step, hi.step);
            const double right = std::max(lo.step, hi.step);
            const double width = right - left;
            if (width <= std::numeric_limits<double>::epsilon() * right) break;
            double t = 0.5 * (lo.step + hi.step);
            if (auto c = cubic_minimizer(lo, hi); c && *c > left + 0.1 * width && *c < right - 0.1 * width) t = *c;
            Sample s = line.at(t);
            note(s);
            if (!armijo(s) || s.loss >= lo.loss) {
                hi = std::move(s);
                continue;
            }
            if (curvature(s)) return finish(std::move(s), line.evaluations, true, true);
            if (s.slope * (hi.step - lo.step) >= 0.0) hi = lo;
            lo = std::move(s);
        }
        return give_up();
    };

    Sample prev{0.0, loss0, slope0, {}, {}};
    double step = std::min(initial_step, params.max_step);
    for (int i = 0; line.evaluations < params.max_evaluations; ++i) {
        Sample s = line.at(step);
        note(s);
        if (!armijo(s) || (i > 0 && s.loss >= prev.loss)) return zoom(std::move(prev), std::move(s));
        if (curvature(s)) return finish(std::move(s), line.evaluations, true, true);
        if (s.slope >= 0.0) return zoom(std::move(s), std::move(prev));
        if (step >= params.max_step) break;
        // Extrapolate: cubic step when it lands sensibly beyond, else quadruple.
        double next = 4.0 * step;
        if (auto c = cubic_minimizer(prev, s); c && *c > 1.1 * step) next = std::min(*c, 100.0 * step);
        prev = std::move(s);
        step = std::min(next, params.max_step);
    }
    return give_up();
}

LineSearchResult strong_wolfe_line_search(const Objective& objective, std::span<const double> x,
                                          std::span<const double> direction, double initial_step,
                                          const LineSearchParams& params) {
    std::vector<double> grad(x.size());
    const double loss = objective(x, grad);
    if (!std::isfinite(loss) || !all_finite(grad)) throw OptimizationError("objective is not finite at the start point");
    auto r = strong_wolfe_line_search(objective, x, loss, grad, direction, initial_step, params);
    r.evaluations += 1;
    return r;
}

namespace {

std::vector<double> two_loop_direction(const std::deque<CurvaturePair>& history, std::span<const double> grad) {
    std::vector<double> q(grad.begin(), grad.end());
    std::vector<double> alpha(history.size());
    for (std::size_t i = history.size(); i-- > 0;) {
        const auto& p = history[i];
        alpha[i] = p.rho * dot(p.s, q);
        for (std::size_t j = 0; j < q.size(); ++j) q[j] -= alpha[i] * p.y[j];
    }
    if (!history.empty()) {
        const auto& last = history.back();
        const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
        for (double& v : q) v *= gamma;
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
        const auto& p = history[i];
        const double beta = p.rho * dot(p.y, q);
        for (std::size_t j = 0; j < q.size(); ++j) q[j] += (alpha[i] - beta) * p.s[j];
    }
    for (double& v : q) v = -v;
    return q;
}

void evaluate_start(const Objective& objective, OptState& state) {
    state.gradient.assign(state.iterate.size(), 0.0);
    const double loss = objective(state.iterate, state.gradient);
    ++state.evaluations;
    if (!std::isfinite(loss) || !all_finite(state.gradient)) {
        throw OptimizationError("iteration 0: objective is not finite at the start point");
    }
    state.loss_trace.push_back(loss);
}

bool stationary(std::span<const double> g) {
    return std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; });
}

}  // namespace

OptState lbfgs_run(const Objective& objective, std::vector<double> x0, int iterations, const LbfgsOptions& options) {
    if (iterations < 1) throw InvalidArgument("lbfgs_run: iterations must be >= 1");
    if (options.memory < 1) throw InvalidArgument("lbfgs_run: memory must be >= 1");
    OptState state;
    state.iterate = std::move(x0);
    evaluate_start(objective, state);

    for (int it = 1; it <= iterations; ++it) {
        state.iteration = it;
        if (stationary(state.gradient)) {
            state.stop = StopReason::Stationary;
            break;
        }
        auto direction = two_loop_direction(state.history, state.gradient);
        if (!(dot(direction, state.gradient) < 0.0)) {
            state.history.clear();
            direction = two_loop_direction(state.history, state.gradient);
        }
        const double initial = state.history.empty() ? 1.0 / std::sqrt(squared_norm(state.gradient)) : 1.0;

        LineSearchResult ls;
        try {
            ls = strong_wolfe_line_search(objective, state.iterate, state.loss_trace.back(), state.gradient, direction,
                                          initial, options.line_search);
        } catch (const OptimizationError& e) {
            throw OptimizationError("iteration " + std::to_string(it) + ": " + e.what());
        }
        state.evaluations += ls.evaluations;
        if (!ls.armijo) {
            state.stop = StopReason::LineSearchFailed;
            break;
        }
        if (!ls.curvature) ++state.wolfe_failures;

        CurvaturePair pair;
        pair.s.resize(ls.x.size());
        pair.y.resize(ls.x.size());
        for (std::size_t i = 0; i < ls.x.size(); ++i) {
            pair.s[i] = ls.x[i] - state.iterate[i];
            pair.y[i] = ls.grad[i] - state.gradient[i];
        }
        const double sy = dot(pair.s, pair.y);
        if (sy > options.curvature_threshold) {
            pair.rho = 1.0 / sy;
            state.history.push_back(std::move(pair));
            if (static_cast<int>(state.history.size()) > options.memory) state.history.pop_front();
        } else {
            ++state.skipped_pairs;
        }
        state.iterate = std::move(ls.x);
        state.gradient = std::move(ls.grad);
        state.loss_trace.push_back(ls.loss);
        if (options.on_iteration) options.on_iteration(state);
    }
    return state;
}

OptState lbfgs_run(const Objective& objective, std::vector<double> x0, int iterations, int memory) {
    LbfgsOptions options;
    options.memory = memory;
    return lbfgs_run(objective, std::move(x0), iterations, options);
}

OptState gd_run(const Objective& objective, std::vector<double> x0, int iterations, double step,
                const GradientDescentOptions& options) {
    if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("gd_run: step must be positive");
    if (iterations < 1) throw InvalidArgument("gd_run: iterations must be >= 1");
    OptState state;
    state.iterate = std::move(x0);
    evaluate_start(objective, state);
    for (int it = 1; it <= iterations; ++it) {
        state.iteration = it;
        if (stationary(state.gradient)) {
            state.stop = StopReason::Stationary;
            break;
        }
        for (std::size_t i = 0; i < state.iterate.size(); ++i) state.iterate[i] -= step * state.gradient[i];
        const double loss = objective(state.iterate, state.gradient);
        ++state.evaluations;
        if (!std::isfinite(loss) || !all_finite(state.gradient)) {
            throw OptimizationError("iteration " + std::to_string(it) + ": objective is not finite");
        }
        state.loss_trace.push_back(loss);
        if (options.on_iteration) options.on_iteration(state);
    }
    return state;
}

}  // namespace nst
