#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sdr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Link { Linear, SinPlusIdentity, Atan2, Cubic, Sinh, Custom };

/// A single index model family Y = f(u, eps) with u = x'beta and
/// eps ~ N(0, noise_sd^2).
///
/// The named links evaluate as
///   Linear           u + eps
///   SinPlusIdentity  u + sin(u) + eps
///   Atan2            2 atan(u) + eps
///   Cubic            u^3 + eps
///   Sinh             sinh(u) + eps
/// Custom links are an arbitrary caller-supplied function of (u, eps).
struct ModelSpec {
    Link link = Link::Linear;
    double noise_sd = 1.0;
    std::function<double(double, double)> custom;
    std::string custom_label = "custom";

    static ModelSpec named(Link link, double noise_sd = 1.0);
    static ModelSpec custom_link(std::function<double(double, double)> f, double noise_sd,
                                 std::string label = "custom");

    double evaluate(double u, double eps) const;
    std::string name() const;
};

/// Parses "linear", "sin", "atan", "cubic", "sinh" (and a few aliases).
std::optional<Link> parse_link(std::string_view text);
std::string link_name(Link link);

enum class BetaScheme { Fixed, RandomUniform };

std::optional<BetaScheme> parse_beta_scheme(std::string_view text);
std::string beta_scheme_name(BetaScheme scheme);

/// Unit loading vector with its support (0-based, ascending).
struct SparseDirection {
    Vector values;
    std::vector<int> support;

    int p() const { return static_cast<int>(values.size()); }
    int s() const { return static_cast<int>(support.size()); }
};

struct SeedProvenance {
    std::uint64_t seed = 0;
    std::string generator;
    std::string scheme;
};

/// Rows of x are observations.
struct Dataset {
    Matrix x;
    Vector y;
    SeedProvenance provenance;

    int n() const { return static_cast<int>(y.size()); }
    int p() const { return static_cast<int>(x.cols()); }
};

SparseDirection generate_beta(int p, int s, BetaScheme scheme, std::uint64_t seed);

Dataset sample_sim(const ModelSpec& model, const SparseDirection& beta, int n, std::uint64_t seed);

/// One-dimensional draws (Z, Y = f(Z, eps)), Z ~ N(0,1), sorted by Y (stable).
struct ScalarSample {
    Vector z;
    Vector y;
};

ScalarSample draw_sorted_scalar(const ModelSpec& model, int count, std::uint64_t seed);

inline constexpr int kDefaultOracleDraws = 1'000'000;
inline constexpr int kDefaultOracleSlices = 1000;

/// Monte-Carlo estimate of C_V = Var(E[Z | f(Z, eps)]) by the one-dimensional
/// slice-mean estimator. Only oracle_slices * floor(mc_n / oracle_slices) draws
/// are made, so every slice has the same count.
double estimate_cv(const ModelSpec& model, int mc_n = kDefaultOracleDraws,
                   int oracle_slices = kDefaultOracleSlices, std::uint64_t seed = 0);

}  // namespace sdr
