#include "nst/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "nst/error.hpp"
#include "nst/loss.hpp"
#include "nst/method_config.hpp"

namespace nst {

std::vector<double> finite_difference_grad(const ScalarFunction& f, std::span<const double> x, double eps) {
    if (!(eps > 0.0)) throw InvalidArgument("finite_difference_grad: eps must be positive");
    std::vector<double> probe(x.begin(), x.end());
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + eps;
        const double up = f(probe);
        probe[i] = x[i] - eps;
        const double down = f(probe);
        probe[i] = x[i];
        if (!std::isfinite(up) || !std::isfinite(down)) {
            throw InvalidArgument("finite_difference_grad: non-finite value at coordinate " + std::to_string(i));
        }
        grad[i] = (up - down) / (2.0 * eps);
    }
    return grad;
}

double relative_error(std::span<const double> analytic, std::span<const double> numeric) {
    if (analytic.size() != numeric.size()) throw InvalidArgument("relative_error: length mismatch");
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
        scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
    }
    return scale == 0.0 ? 0.0 : diff / scale;
}

bool GradcheckReport::passed() const noexcept {
    for (const auto& e : entries) {
        if (!e.passed) return false;
    }
    return !entries.empty();
}

std::string GradcheckReport::text() const {
    std::ostringstream out;
    out << "gradient check, seed " << seed << ", tolerance " << tolerance << "\n";
    for (const auto& e : entries) {
        char line[160];
        std::snprintf(line, sizeof line, "  %-20s max rel. err %.3e  %s\n", e.name.c_str(), e.max_relative_error,
                      e.passed ? "PASS" : "FAIL");
        out << line;
    }
    out << (passed() ? "all passed\n" : "FAILED\n");
    return out.str();
}

nlohmann::json GradcheckReport::json() const {
    nlohmann::json doc = {{"seed", seed}, {"tolerance", tolerance}, {"passed", passed()}};
    auto& list = doc["entries"] = nlohmann::json::array();
    for (const auto& e : entries) {
        list.push_back({{"name", e.name}, {"max_relative_error", e.max_relative_error}, {"passed", e.passed}});
    }
    return doc;
}

namespace {

Volume random_volume(std::mt19937_64& rng, std::size_t k, std::size_t w, std::size_t h, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Volume v(k, w, h);
    for (double& x : v.data()) x = dist(rng);
    return v;
}

struct StatisticCase {
    StatisticKind kind;
    StatisticParams params;
    std::vector<Volume> inputs;
};

std::vector<StatisticCase> statistic_cases(std::mt19937_64& rng) {
    std::vector<StatisticCase> cases;
    cases.push_back({StatisticKind::PlainGram, {}, {random_volume(rng, 3, 4, 4, 0.0, 2.0)}});
    cases.push_back({StatisticKind::ShiftedGram, {-1.0, 0, 1.0}, {random_volume(rng, 3, 4, 4, 0.0, 2.0)}});
    cases.push_back({StatisticKind::InterLayer,
                     {-1.0, 1, 1.0},
                     {random_volume(rng, 2, 4, 4, 0.0, 2.0), random_volume(rng, 3, 2, 2, 0.0, 2.0)}});
    cases.push_back({StatisticKind::AdjacentInterLayer,
                     {-1.0, 1, 1.0},
                     {random_volume(rng, 2, 4, 4, 0.0, 2.0), random_volume(rng, 3, 2, 2, 0.0, 2.0)}});
    cases.push_back({StatisticKind::Amplified, {0.0, 0, 1.5}, {random_volume(rng, 3, 4, 4, 0.1, 2.0)}});
    cases.push_back({StatisticKind::ContentAware,
                     {-1.0, 0, 1.0},
                     {random_volume(rng, 3, 4, 4, 0.0, 2.0), random_volume(rng, 2, 4, 4, 0.0, 2.0)}});
    cases.push_back({StatisticKind::GramCube, {-1.0, 0, 1.0}, {random_volume(rng, 3, 4, 4, 0.0, 2.0)}});
    return cases;
}

std::vector<const Volume*> pointers(const std::vector<Volume>& volumes) {
    std::vector<const Volume*> out;
    for (const auto& v : volumes) out.push_back(&v);
    return out;
}

}  // namespace

GradcheckReport check_all_statistics(std::uint64_t seed, const VjpFunction& vjp, double tolerance) {
    std::mt19937_64 rng(seed);
    GradcheckReport report;
    report.seed = seed;
    report.tolerance = tolerance;
    for (auto& c : statistic_cases(rng)) {
        const auto value_size = evaluate_statistic(c.kind, c.params, pointers(c.inputs)).size();
        std::vector<double> upstream(value_size);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (double& u : upstream) u = dist(rng);

        const auto analytic = vjp(c.kind, c.params, pointers(c.inputs), upstream);
        double worst = 0.0;
        bool ok = analytic.size() == c.inputs.size();
        for (std::size_t which = 0; ok && which < c.inputs.size(); ++which) {
            auto probe = c.inputs;
            auto f = [&](std::span<const double> x) {
                std::copy(x.begin(), x.end(), probe[which].data().begin());
                const auto stat = evaluate_statistic(c.kind, c.params, pointers(probe));
                return dot(upstream, stat.value);
            };
            const auto numeric = finite_difference_grad(f, c.inputs[which].data());
            if (!analytic[which].same_shape(c.inputs[which])) {
                ok = false;
                break;
            }
            worst = std::max(worst, relative_error(analytic[which].data(), numeric));
        }
        if (!ok) worst = std::numeric_limits<double>::infinity();
        report.entries.push_back({std::string(to_string(c.kind)), worst, worst < tolerance});
    }
    return report;
}

const std::vector<std::string>& gradcheck_families() {
    static const std::vector<std::string> families = {"Classic",       "ClassicDense", "Chain",        "ChainBlurred",
                                                      "ChainExtended", "Amplified",    "ContentAware", "GramCube"};
    return families;
}

GradcheckReport check_preset_families(std::uint64_t seed, double tolerance) {
    GradcheckReport report;
    report.seed = seed;
    report.tolerance = tolerance;

    ToyNetworkOptions options;
    options.seed = seed;
    const auto net = make_toy_network(options);
    const auto layout = PresetLayout::from_layers(net.specs());
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const Volume content = random_volume(rng, 3, 8, 8, -1.0, 1.0);
    const Volume style = random_volume(rng, 3, 8, 8, -1.0, 1.0);
    Volume image = content;
    std::normal_distribution<double> noise(0.0, 0.3);
    for (double& v : image.data()) v += noise(rng);

    for (const auto& family : gradcheck_families()) {
        MethodOverrides overrides;
        if (family == "Amplified") overrides.power = 1.5;
        const auto config = build_method_config(family, overrides, layout);
        const auto target_style = style_target(style, config, net);
        const StyleTransferLoss loss(config, net, target_style, capture_activations(content, config, net));

        const auto analytic = loss.evaluate(image).gradient;
        Volume probe = image;
        auto f = [&](std::span<const double> x) {
            std::copy(x.begin(), x.end(), probe.data().begin());
            return loss.evaluate(probe).total;
        };
        const auto numeric = finite_difference_grad(f, image.data());
        const double err = relative_error(analytic.data(), numeric);
        report.entries.push_back({family, err, err < tolerance});
    }
    return report;
}

}  // namespace nst
