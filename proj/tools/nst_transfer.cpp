#include <iostream>

#include <CLI11.hpp>

#include "nst/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Neural style transfer with Gram-matrix style statistics"};
    nst::RunRequest request;
    bool list = false;
    std::string config;

    app.add_flag("--list-methods", list, "Print the method presets and exit");
    app.add_option("--content", request.content, "Content image (PNG or JPEG)");
    app.add_option("--style", request.style, "Style image (PNG or JPEG)");
    app.add_option("--method", request.method, "Method preset name")->capture_default_str();
    app.add_option("--config", config, "JSON method config (overrides --method)");
    app.add_option("--out", request.output, "Output PNG")->capture_default_str();
    app.add_option("--iters", request.iterations, "Optimizer iterations (default 270)");
    app.add_option("--style-weight", request.style_weight, "Style weight alpha (default 2e9)");
    app.add_option("--shift", request.shift, "Activation shift s");
    app.add_option("--size", request.size, "Square working size, multiple of 16 (default 512)");
    app.add_option("--checkpoint-every", request.checkpoint_every, "Write <out>_iter<N>.png every N iterations");
    app.add_option("--weights", request.weights, "Weight container")->capture_default_str();
    app.add_option("--seed", request.seed, "Seed for randomized initializations");
    app.add_option("--gd-step", request.gd_step, "Fixed step for masked runs (0 = automatic)");

    CLI11_PARSE(app, argc, argv);

    if (list) {
        std::cout << nst::list_methods();
        return 0;
    }
    if (!config.empty()) request.config = config;
    if (request.content.empty() || request.style.empty()) {
        std::cerr << "error: --content and --style are required\n";
        return nst::kExitFailure;
    }
    return nst::run(request, std::cout, std::cerr);
}
