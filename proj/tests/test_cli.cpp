#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sys/wait.h>
#include <sstream>

#include "nst/cli.hpp"
#include "nst/imaging.hpp"
#include "nst/method_config.hpp"
#include "nst/weight_container.hpp"

using namespace nst;
namespace fs = std::filesystem;

namespace {

struct Fixture {
    fs::path dir;
    fs::path weights, content, style;

    Fixture() {
        dir = fs::temp_directory_path() / "nst_cli_test";
        fs::remove_all(dir);
        fs::create_directories(dir);
        weights = dir / "toy.nstw";
        save_weights_file(weights, make_toy_network({.seed = 42, .weight_scale = 0.05}));
        content = dir / "content.png";
        style = dir / "style.png";
        PixelImage c(20, 24), s(16, 16);
        for (std::size_t y = 0; y < c.height; ++y)
            for (std::size_t x = 0; x < c.width; ++x)
                for (std::size_t k = 0; k < 3; ++k) c.at(x, y, k) = static_cast<std::uint8_t>((x * 11 + y * 7 + k * 50) % 256);
        for (std::size_t y = 0; y < s.height; ++y)
            for (std::size_t x = 0; x < s.width; ++x)
                for (std::size_t k = 0; k < 3; ++k) s.at(x, y, k) = static_cast<std::uint8_t>(((x / 4 + y / 4) % 2) * 200 + k * 20);
        save_png(content, c);
        save_png(style, s);
    }
    ~Fixture() { fs::remove_all(dir); }

    RunRequest request(const std::string& method, const std::string& out) const {
        RunRequest r;
        r.content = content;
        r.style = style;
        r.method = method;
        r.output = dir / out;
        r.weights = weights;
        r.size = 16;
        r.iterations = 4;
        r.style_weight = 1e3;
        return r;
    }
};

struct Progress {
    int iter;
    double total, style, content;
};

std::vector<Progress> parse(const std::string& text) {
    static const std::regex line(R"(^iter=(\d+) total=(\S+) style=(\S+) content=(\S+)$)");
    std::vector<Progress> out;
    std::istringstream in(text);
    std::string l;
    while (std::getline(in, l)) {
        std::smatch m;
        REQUIRE(std::regex_match(l, m, line));
        out.push_back({std::stoi(m[1]), std::stod(m[2]), std::stod(m[3]), std::stod(m[4])});
    }
    return out;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("run emits parseable progress, checkpoints and a final image") {
    Fixture f;
    auto r = f.request("ChainBlurred", "result.png");
    r.checkpoint_every = 2;
    std::ostringstream out, err;
    REQUIRE(run(r, out, err) == kExitOk);
    CHECK(err.str().empty());
    const auto progress = parse(out.str());
    REQUIRE(progress.size() >= 2);
    for (std::size_t i = 0; i < progress.size(); ++i) {
        CHECK(progress[i].iter == static_cast<int>(i));
        CHECK(std::isfinite(progress[i].total));
        CHECK(std::isfinite(progress[i].style));
        CHECK(std::isfinite(progress[i].content));
        if (i > 0) CHECK(progress[i].total <= progress[i - 1].total);
    }
    CHECK(fs::exists(f.dir / "result.png"));
    CHECK(fs::exists(f.dir / "result_iter2.png"));
    CHECK(checkpoint_path(f.dir / "result.png", 2) == f.dir / "result_iter2.png");
    const auto img = load_image(f.dir / "result.png");
    CHECK(img.width == 16);
    CHECK(img.height == 16);
}

TEST_CASE("same request gives a bit-identical image") {
    Fixture f;
    std::ostringstream o1, o2, e;
    REQUIRE(run(f.request("Chain", "a.png"), o1, e) == kExitOk);
    REQUIRE(run(f.request("Chain", "b.png"), o2, e) == kExitOk);
    CHECK(read_file(f.dir / "a.png") == read_file(f.dir / "b.png"));
    CHECK(o1.str() == o2.str());
}

TEST_CASE("content equal to style starts at zero loss") {
    Fixture f;
    auto r = f.request("Classic", "same.png");
    r.style = r.content;
    std::ostringstream out, err;
    REQUIRE(run(r, out, err) == kExitOk);
    const auto progress = parse(out.str());
    REQUIRE(!progress.empty());
    CHECK(progress[0].total == 0.0);
    CHECK(load_image(f.dir / "same.png") == resize_bilinear(load_image(f.content), 16, 16));
}

TEST_CASE("masked runs use gradient descent") {
    Fixture f;
    auto r = f.request("Masked", "masked.png");
    r.iterations = 3;
    std::ostringstream out, err;
    REQUIRE(run(r, out, err) == kExitOk);
    CHECK(parse(out.str()).size() == 4);
}

TEST_CASE("json config file") {
    Fixture f;
    auto config = to_json(build_method_config("Chain", {}, PresetLayout::from_layers(make_toy_network({.seed = 42}).specs())));
    const auto path = f.dir / "chain.json";
    std::ofstream(path) << config.dump(2);
    auto r = f.request("ignored", "cfg.png");
    r.config = path;
    std::ostringstream out, err;
    CHECK(run(r, out, err) == kExitOk);
    CHECK(err.str().empty());

    std::ofstream(f.dir / "bad.json") << "{not json";
    r.config = f.dir / "bad.json";
    std::ostringstream out2, err2;
    CHECK(run(r, out2, err2) == kExitFailure);
    CHECK(err2.str().find("bad.json") != std::string::npos);
}

TEST_CASE("errors") {
    Fixture f;
    auto r = f.request("Classic", "never.png");
    r.weights = f.dir / "missing.nstw";
    std::ostringstream out, err;
    CHECK(run(r, out, err) == kExitWeights);
    CHECK(err.str().find("missing.nstw") != std::string::npos);
    CHECK_FALSE(fs::exists(f.dir / "never.png"));

    auto bad_size = f.request("Classic", "never.png");
    bad_size.size = 20;
    std::ostringstream o2, e2;
    CHECK(run(bad_size, o2, e2) == kExitFailure);
    CHECK_FALSE(fs::exists(f.dir / "never.png"));

    auto bad_method = f.request("Fancy", "never.png");
    std::ostringstream o3, e3;
    CHECK(run(bad_method, o3, e3) == kExitFailure);
    CHECK(e3.str().find("Fancy") != std::string::npos);

    auto missing_image = f.request("Classic", "never.png");
    missing_image.content = f.dir / "nope.png";
    std::ostringstream o4, e4;
    CHECK(run(missing_image, o4, e4) == kExitFailure);
    CHECK(e4.str().find("nope.png") != std::string::npos);
}

TEST_CASE("defaults") {
    const RunRequest r;
    CHECK_FALSE(r.iterations.has_value());
    const auto c = build_method_config(r.method);
    CHECK(c.iterations == 270);
    CHECK(c.style_weight == 2e9);
    CHECK(c.image_size == 512);
}

TEST_CASE("list_methods") {
    const auto text = list_methods();
    CHECK(text == list_methods());
    std::size_t experimental = 0, compared = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        experimental += line.find(" experimental ") != std::string::npos;
        compared += line.find(" compared ") != std::string::npos;
    }
    CHECK(compared == 9);
    CHECK(experimental == 4);
}

#ifdef NST_TRANSFER_BIN
TEST_CASE("command line binary") {
    Fixture f;
    const std::string bin = NST_TRANSFER_BIN;
    const auto list = f.dir / "list.txt";
    CHECK(std::system((bin + " --list-methods > " + list.string()).c_str()) == 0);
    CHECK(read_file(list) == list_methods());

    const auto log = f.dir / "log.txt";
    const std::string missing = bin + " --content " + f.content.string() + " --style " + f.style.string() +
                                " --weights " + (f.dir / "absent.nstw").string() + " 2> " + log.string();
    const int status = std::system(missing.c_str());
    CHECK(WEXITSTATUS(status) == 2);
    CHECK(read_file(log).find("absent.nstw") != std::string::npos);

    const std::string ok = bin + " --content " + f.content.string() + " --style " + f.style.string() + " --weights " +
                           f.weights.string() + " --method Chain --size 16 --iters 2 --style-weight 100 --shift -1" +
                           " --checkpoint-every 1 --out " + (f.dir / "cli.png").string() + " > " + log.string();
    CHECK(std::system(ok.c_str()) == 0);
    CHECK(fs::exists(f.dir / "cli.png"));
    CHECK(fs::exists(f.dir / "cli_iter1.png"));
    CHECK(parse(read_file(log)).size() == 3);
}
#endif
