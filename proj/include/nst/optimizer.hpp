#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace nst {

/// Writes the gradient at `x` into `grad` (same length) and returns the loss.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct LineSearchParams {
    double c1 = 1e-4;  // sufficient decrease
    double c2 = 0.9;   // curvature
    int max_evaluations = 25;
    double max_step = 1e20;
};

struct LineSearchResult {
    double step = 0.0;
    double loss = 0.0;
    std::vector<double> x;
    std::vector<double> grad;
    int evaluations = 0;
    bool armijo = false;
    bool curvature = false;

    bool wolfe() const noexcept { return armijo && curvature; }
};

/// Bracket-and-zoom search for a step satisfying the strong Wolfe conditions
/// along a descent direction. When none is found within the evaluation budget
/// the best step satisfying sufficient decrease is returned with
/// `curvature == false`; if even that fails, `armijo == false` and step is 0.
LineSearchResult strong_wolfe_line_search(const Objective& objective, std::span<const double> x, double loss0,
                                          std::span<const double> grad0, std::span<const double> direction,
                                          double initial_step, const LineSearchParams& params = {});

/// Convenience overload evaluating the objective at `x` first.
LineSearchResult strong_wolfe_line_search(const Objective& objective, std::span<const double> x,
                                          std::span<const double> direction, double initial_step,
                                          const LineSearchParams& params = {});

struct CurvaturePair {
    std::vector<double> s;
    std::vector<double> y;
    double rho = 0.0;
};

enum class StopReason { IterationLimit, Stationary, LineSearchFailed };

struct OptState {
    std::vector<double> iterate;
    std::vector<double> gradient;
    std::deque<CurvaturePair> history;
    int iteration = 0;
    // Loss at the start and after every accepted step.
    std::vector<double> loss_trace;
    int evaluations = 0;
    int skipped_pairs = 0;
    int wolfe_failures = 0;
    StopReason stop = StopReason::IterationLimit;
};

struct LbfgsOptions {
    int memory = 10;
    LineSearchParams line_search;
    double curvature_threshold = 1e-10;
    // Called after each completed iteration with the current state.
    std::function<void(const OptState&)> on_iteration;
};

/// L-BFGS (two-loop recursion) with strong Wolfe line search. The first step
/// is tried at length 1/||g||, later ones at 1. Curvature pairs with
/// <s, y> <= curvature_threshold are skipped.
OptState lbfgs_run(const Objective& objective, std::vector<double> x0, int iterations, const LbfgsOptions& options = {});
OptState lbfgs_run(const Objective& objective, std::vector<double> x0, int iterations, int memory);

struct GradientDescentOptions {
    std::function<void(const OptState&)> on_iteration;
};

/// Fixed-step gradient descent; no line search.
OptState gd_run(const Objective& objective, std::vector<double> x0, int iterations, double step,
                const GradientDescentOptions& options = {});

}  // namespace nst
