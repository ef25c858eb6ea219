#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdr/recovery_sdp.hpp"

namespace sdr {

enum class SparsityRule { SqrtP, LogP, Explicit };
enum class Method { DtSir, Sdp };

std::optional<Method> parse_method(std::string_view text);
std::string method_name(Method method);

struct CurveConfig {
    ModelSpec model = ModelSpec::named(Link::Atan2, 1.0);
    int p = 100;
    SparsityRule sparsity_rule = SparsityRule::SqrtP;
    int explicit_s = 0;
    BetaScheme beta_scheme = BetaScheme::Fixed;
    Method method = Method::DtSir;
    int h = 10;
    std::vector<double> gamma_grid;
    int reps = 500;
    std::uint64_t master_seed = 0;
    SirMode estimator_mode = SirMode::Centered;
    // Overrides default_lambda for the Sdp method when set.
    std::optional<double> lambda;
    SdpConfig sdp;
    int workers = 1;

    /// s from the sparsity rule: round(sqrt p), round(log p) or explicit_s.
    int sparsity() const;
    void validate() const;
};

/// n = ceil(gamma * s * log(p - s)), natural log.
long sample_size_for(double gamma, int s, int p);

struct CurvePoint {
    double gamma = 0.0;
    long n = 0;
    int successes = 0;
    int reps = 0;
    double success_rate = 0.0;
    bool skipped = false; // n < 2h
    double wall_seconds = 0.0;
};

struct EfficiencyCurve {
    CurveConfig config;
    int s = 0;
    std::vector<CurvePoint> points;
};

/// Outcome of one replicate: generate beta, sample, estimate, recover, score.
bool run_replicate(const CurveConfig& cfg, int s, long n, std::uint64_t seed);

/// Monte-Carlo efficiency curve. Replicate r of grid point k uses the seed
/// derive_seed(master_seed, k, r), so the counts do not depend on worker count
/// or scheduling.
EfficiencyCurve run_curve(const CurveConfig& cfg);

inline constexpr int kInnerSliceFactor = 50;

struct StabilityDiagnostic {
    std::vector<int> h_grid;
    // For each H: the H estimated variances Var[m(Y) | Y in S_h].
    std::vector<std::vector<double>> per_slice_variances;
    // For each H: the upper y-boundary of slices 1..H-1 (the last slice is open).
    std::vector<std::vector<double>> slice_boundaries;
    std::vector<double> sums;
    std::vector<double> sum_se;
    std::vector<double> mean_decay; // sums / H
    std::vector<double> mean_decay_se;
    double total_variance = 0.0; // Var[m(Y)] from the one-dimensional oracle
    double kappa_fit = 0.0;       // slope of log(sum) against log(H)
    double kappa_upper95 = 0.0;   // 95% parametric-bootstrap upper bound on kappa
};

/// Sliced-stability diagnostic in one dimension (Z ~ N(0,1), Y = f(Z, eps)).
/// For each H the sorted draws are cut into 50 H inner slices whose Z-means
/// estimate m(y); outer slice h groups 50 consecutive inner slices and its
/// variance is the spread of those inner means with the inner-mean sampling
/// noise subtracted.
StabilityDiagnostic stability_diagnostic(const ModelSpec& model, const std::vector<int>& h_grid,
                                         int mc_n, std::uint64_t seed);

/// Least-squares slope of log(y) on log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sdr
