#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace nst {

struct RunRequest {
    std::filesystem::path content;
    std::filesystem::path style;
    std::string method = "ChainBlurred";
    std::optional<std::filesystem::path> config;
    std::filesystem::path output = "out.png";
    std::optional<int> iterations;
    std::optional<double> style_weight;
    std::optional<double> shift;
    std::optional<int> size;
    int checkpoint_every = 0;
    std::filesystem::path weights = "vgg19_normalized.nstw";
    // Only used by randomized initializations; runs start from the content image.
    std::uint64_t seed = 0;
    // Fixed step for masked (gradient-descent) runs; 0 picks 1 / max|g0|.
    double gd_step = 0.0;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitWeights = 2;

/// Executes one transfer. Progress lines go to `out` as
/// `iter=<n> total=<f> style=<f> content=<f>`; errors go to `err`.
int run(const RunRequest& request, std::ostream& out, std::ostream& err);

std::string list_methods();

/// `<stem>_iter<N>.png` next to the output path.
std::filesystem::path checkpoint_path(const std::filesystem::path& output, int iteration);

}  // namespace nst
