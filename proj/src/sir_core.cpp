#include "sdr/sir_core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/random/uniform_int_distribution.hpp>

#include "sdr/errors.hpp"
#include "sdr/rng.hpp"

namespace sdr {

namespace {

// Upper triangle of (1/h) M'M with a fixed left-to-right summation order,
// mirrored into the lower triangle.
Matrix outer_product_average(const Matrix& means)
{
    const Eigen::Index h = means.rows();
    const Eigen::Index p = means.cols();
    Matrix v(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index k = j; k < p; ++k) {
            double acc = 0.0;
            for (Eigen::Index r = 0; r < h; ++r)
                acc += means(r, j) * means(r, k);
            v(j, k) = acc / static_cast<double>(h);
            v(k, j) = v(j, k);
        }
    }
    return v;
}

void mirror_upper(Matrix& m)
{
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = j + 1; i < m.rows(); ++i)
            m(i, j) = m(j, i);
}

}  // namespace

std::optional<SirMode> parse_sir_mode(std::string_view text)
{
    std::string t(text);
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "raw")
        return SirMode::Raw;
    if (t == "centered" || t == "centred")
        return SirMode::Centered;
    if (t == "whitened")
        return SirMode::Whitened;
    return std::nullopt;
}

std::string sir_mode_name(SirMode mode)
{
    switch (mode) {
    case SirMode::Raw: return "raw";
    case SirMode::Centered: return "centered";
    case SirMode::Whitened: return "whitened";
    }
    return "unknown";
}

SlicedSample slice_data(const Dataset& data, int h, std::uint64_t seed)
{
    const int n = data.n();
    if (data.x.rows() != n)
        throw InvalidArgument("slice_data: x has " + std::to_string(data.x.rows()) +
                              " rows but y has " + std::to_string(n) + " entries");
    if (h < 2)
        throw InvalidArgument("slice_data: need at least 2 slices, got " + std::to_string(h));
    if (n < 2 * h)
        throw InvalidArgument("slice_data: need n >= 2h, got n=" + std::to_string(n) +
                              ", h=" + std::to_string(h));

    SlicedSample out;
    out.h = h;
    out.m = n / h;
    out.dropped = n - h * out.m;

    out.order.resize(n);
    std::iota(out.order.begin(), out.order.end(), 0);
    std::stable_sort(out.order.begin(), out.order.end(),
                     [&](int a, int b) { return data.y[a] < data.y[b]; });

    // Discard `dropped` sorted positions uniformly at random (partial
    // Fisher-Yates over positions), then keep the rest in sorted order.
    std::vector<char> keep(n, 1);
    if (out.dropped > 0) {
        Engine engine = make_engine(seed);
        std::vector<int> positions(n);
        std::iota(positions.begin(), positions.end(), 0);
        for (int i = 0; i < out.dropped; ++i) {
            boost::random::uniform_int_distribution<int> pick(i, n - 1);
            std::swap(positions[i], positions[pick(engine)]);
            keep[positions[i]] = 0;
        }
    }
    out.used.reserve(static_cast<std::size_t>(h) * out.m);
    for (int r = 0; r < n; ++r)
        if (keep[r])
            out.used.push_back(out.order[r]);

    const int p = data.p();
    out.slice_means = Matrix::Zero(h, p);
    for (int k = 0; k < h; ++k) {
        for (int i = 0; i < out.m; ++i) {
            const int row = out.used[static_cast<std::size_t>(k) * out.m + i];
            for (int j = 0; j < p; ++j)
                out.slice_means(k, j) += data.x(row, j);
        }
    }
    out.slice_means /= static_cast<double>(out.m);
    return out;
}

SirMatrix sir_matrix(const SlicedSample& sliced, SirMode mode)
{
    if (mode == SirMode::Whitened)
        throw InvalidArgument("sir_matrix: whitened mode needs the full dataset (use sir_matrix_whitened)");
    SirMatrix out;
    out.mode = mode;
    out.h = sliced.h;
    if (mode == SirMode::Raw) {
        out.v = outer_product_average(sliced.slice_means);
    } else {
        // Plain loops keep the result exactly equivariant under column permutations.
        Matrix centered = sliced.slice_means;
        for (Eigen::Index j = 0; j < centered.cols(); ++j) {
            double grand = 0.0;
            for (Eigen::Index r = 0; r < centered.rows(); ++r)
                grand += centered(r, j);
            grand /= static_cast<double>(centered.rows());
            for (Eigen::Index r = 0; r < centered.rows(); ++r)
                centered(r, j) -= grand;
        }
        out.v = outer_product_average(centered);
    }
    return out;
}

Matrix inv_sqrt_sym(const Matrix& sigma, double eig_floor)
{
    if (sigma.rows() != sigma.cols())
        throw InvalidArgument("inv_sqrt_sym: matrix is not square");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
    if (eig.info() != Eigen::Success)
        throw NumericalError("inv_sqrt_sym: eigendecomposition failed");
    const Vector& lambda = eig.eigenvalues();
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (!(lambda[i] >= eig_floor)) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "matrix is not positive definite: eigenvalue " << lambda[i]
                << " is below the floor " << eig_floor;
            throw NotPositiveDefinite(msg.str(), lambda[i]);
        }
    }
    const Vector scale = lambda.array().rsqrt();
    const Matrix& q = eig.eigenvectors();
    Matrix out = q * scale.asDiagonal() * q.transpose();
    mirror_upper(out);
    return out;
}

double default_eig_floor(const Matrix& sigma)
{
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().size() ? eig.eigenvalues().maxCoeff() : 0.0;
    return top > 0.0 ? 1e-10 * top : 1e-300;
}

Matrix sample_covariance(const Matrix& x)
{
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Matrix centered = x.rowwise() - mean;
    Matrix cov = (centered.transpose() * centered) / static_cast<double>(x.rows());
    mirror_upper(cov);
    return cov;
}

SirMatrix sir_matrix_whitened(const Dataset& data, int h, std::uint64_t seed,
                              std::optional<double> eig_floor)
{
    if (data.n() <= data.p())
        throw RankDeficient("whitening needs n > p (got n=" + std::to_string(data.n()) +
                            ", p=" + std::to_string(data.p()) +
                            "); whiten the design externally, e.g. with a sparse precision estimate");
    const SlicedSample sliced = slice_data(data, h, seed);
    const SirMatrix centered = sir_matrix(sliced, SirMode::Centered);

    const Matrix sigma = sample_covariance(data.x);
    const Matrix w = inv_sqrt_sym(sigma, eig_floor.value_or(default_eig_floor(sigma)));

    SirMatrix out;
    out.mode = SirMode::Whitened;
    out.h = h;
    out.v = w * centered.v * w;
    mirror_upper(out.v);
    return out;
}

SirMatrix compute_sir(const Dataset& data, int h, SirMode mode, std::uint64_t seed)
{
    if (mode == SirMode::Whitened)
        return sir_matrix_whitened(data, h, seed);
    return sir_matrix(slice_data(data, h, seed), mode);
}

}  // namespace sdr
