#include "nst/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "nst/error.hpp"
#include "nst/imaging.hpp"
#include "nst/loss.hpp"
#include "nst/method_config.hpp"
#include "nst/optimizer.hpp"
#include "nst/weight_container.hpp"

namespace nst {

namespace {

MethodConfig resolve_config(const RunRequest& request, const PresetLayout& layout) {
    if (!request.config) {
        MethodOverrides o;
        o.iterations = request.iterations;
        o.style_weight = request.style_weight;
        o.shift = request.shift;
        o.image_size = request.size;
        return build_method_config(request.method, o, layout);
    }
    std::ifstream in(*request.config);
    if (!in) throw IoError("cannot open config " + request.config->string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("config " + request.config->string() + " is not valid JSON: " + e.what());
    }
    auto c = method_config_from_json(doc, layout);
    if (request.iterations) c.iterations = *request.iterations;
    if (request.style_weight) c.style_weight = *request.style_weight;
    if (request.size) c.image_size = *request.size;
    if (request.shift) {
        c.shift = *request.shift;
        for (auto& t : c.style_terms) {
            if (t.variant == StatisticKind::PlainGram || t.variant == StatisticKind::ShiftedGram) {
                t.variant = c.shift == 0.0 ? StatisticKind::PlainGram : StatisticKind::ShiftedGram;
            }
        }
    }
    validate_method_config(c, layout);
    return c;
}

void print_progress(std::ostream& out, int iteration, double total, double style, double content) {
    char line[256];
    std::snprintf(line, sizeof line, "iter=%d total=%.10g style=%.10g content=%.10g\n", iteration, total, style,
                  content);
    out << line << std::flush;
}

int execute(const RunRequest& request, std::ostream& out) {
    NetworkWeights weights = load_weights_file(request.weights);
    const auto layout = PresetLayout::from_layers(weights.specs());
    const auto config = resolve_config(request, layout);
    const auto side = static_cast<std::size_t>(config.image_size);

    const auto content_img = resize_bilinear(load_image(request.content), side, side);
    const auto style_img = resize_bilinear(load_image(request.style), side, side);
    const Volume content = preprocess(content_img, weights.input);
    const Volume style = preprocess(style_img, weights.input);

    const StyleTransferLoss loss(config, weights, style_target(style, config, weights),
                                 capture_activations(content, config, weights));

    struct Parts {
        double style, content;
    };
    std::map<double, Parts> recent;
    Volume probe = content;
    Objective objective = [&](std::span<const double> x, std::span<double> grad) {
        std::copy(x.begin(), x.end(), probe.data().begin());
        auto r = loss.evaluate(probe);
        std::copy(r.gradient.data().begin(), r.gradient.data().end(), grad.begin());
        recent[r.total] = {r.style, r.content};
        return r.total;
    };

    auto report = [&](const OptState& state) {
        const double total = state.loss_trace.back();
        const auto it = recent.find(total);
        const Parts parts = it != recent.end() ? it->second : Parts{NAN, NAN};
        recent.clear();
        print_progress(out, state.iteration, total, parts.style, parts.content);
        if (request.checkpoint_every > 0 && state.iteration % request.checkpoint_every == 0) {
            Volume v(3, side, side, state.iterate);
            save_png(checkpoint_path(request.output, state.iteration), deprocess(v, weights.input));
        }
    };

    std::vector<double> x0 = content.storage();
    OptState result;
    {
        // Iteration 0 is the starting point.
        std::vector<double> g(x0.size());
        const double f0 = objective(x0, g);
        const auto parts = recent.at(f0);
        print_progress(out, 0, f0, parts.style, parts.content);
        recent.clear();
        if (config.masked()) {
            double step = request.gd_step;
            if (step <= 0.0) {
                double gmax = 0.0;
                for (double v : g) gmax = std::max(gmax, std::abs(v));
                step = gmax > 0.0 ? 1.0 / gmax : 1.0;
            }
            result = gd_run(objective, std::move(x0), config.iterations, step, {report});
        } else {
            LbfgsOptions options;
            options.on_iteration = report;
            result = lbfgs_run(objective, std::move(x0), config.iterations, options);
        }
    }

    Volume final_volume(3, side, side, std::move(result.iterate));
    save_png(request.output, deprocess(final_volume, weights.input));
    return kExitOk;
}

}  // namespace

std::filesystem::path checkpoint_path(const std::filesystem::path& output, int iteration) {
    auto name = output.stem().string() + "_iter" + std::to_string(iteration) + ".png";
    return output.parent_path() / name;
}

int run(const RunRequest& request, std::ostream& out, std::ostream& err) {
    if (!std::filesystem::exists(request.weights)) {
        err << "error: weight file not found: " << request.weights.string() << "\n";
        return kExitWeights;
    }
    try {
        return execute(request, out);
    } catch (const LoadError& e) {
        err << "error: " << request.weights.string() << ": " << e.what() << "\n";
        return kExitWeights;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

std::string list_methods() { return method_table(vgg19_layout()); }

}  // namespace nst
