#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdr/sim_models.hpp"

namespace sdr {

/// Data sorted by the response and cut into h slices of m rows each.
struct SlicedSample {
    int h = 0;
    int m = 0;
    Matrix slice_means;     // h x p, row k is the mean of the k-th slice
    int dropped = 0;        // n - h*m rows discarded at random
    std::vector<int> order; // stable sort permutation of all n rows by y
    std::vector<int> used;  // rows kept, in sorted order (h*m entries)
};

enum class SirMode { Raw, Centered, Whitened };

std::optional<SirMode> parse_sir_mode(std::string_view text);
std::string sir_mode_name(SirMode mode);

struct SirMatrix {
    Matrix v;
    SirMode mode = SirMode::Raw;
    int h = 0;

    int p() const { return static_cast<int>(v.rows()); }
};

SlicedSample slice_data(const Dataset& data, int h, std::uint64_t seed);

/// Raw: (1/H) sum_h xbar_h xbar_h'. Centered: the same after removing the grand
/// mean of the slice means. Entries are computed on the upper triangle with a
/// fixed summation order and mirrored, so the result is exactly symmetric and
/// exactly equivariant under column permutations.
SirMatrix sir_matrix(const SlicedSample& sliced, SirMode mode);

/// Symmetric inverse square root Q diag(1/sqrt(lambda)) Q'. Throws
/// NotPositiveDefinite if any eigenvalue is below eig_floor.
Matrix inv_sqrt_sym(const Matrix& sigma, double eig_floor);

/// 1e-10 times the largest eigenvalue (scale-relative PD floor).
double default_eig_floor(const Matrix& sigma);

/// Population-normalized sample covariance n^-1 sum (x_i - xbar)(x_i - xbar)'.
Matrix sample_covariance(const Matrix& x);

/// Sigma^{-1/2} Vhat Sigma^{-1/2} with Vhat the Centered slice-mean matrix.
/// Throws RankDeficient when n <= p.
SirMatrix sir_matrix_whitened(const Dataset& data, int h, std::uint64_t seed,
                              std::optional<double> eig_floor = std::nullopt);

/// Dispatches on mode; Whitened goes through sir_matrix_whitened.
SirMatrix compute_sir(const Dataset& data, int h, SirMode mode, std::uint64_t seed);

}  // namespace sdr
