#include "sdr/recovery_dt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sdr/errors.hpp"

namespace sdr {

int SignedSupport::s_hat() const
{
    return static_cast<int>(std::count_if(signs.begin(), signs.end(), [](int v) { return v != 0; }));
}

SignedSupport SignedSupport::of(const Vector& direction)
{
    SignedSupport out;
    out.signs.resize(direction.size());
    for (Eigen::Index j = 0; j < direction.size(); ++j)
        out.signs[j] = (direction[j] > 0.0) - (direction[j] < 0.0);
    return out;
}

std::vector<int> dt_select(const SirMatrix& v, int s)
{
    const int p = v.p();
    if (s < 1 || s > p)
        throw InvalidArgument("dt_select: need 1 <= s <= p, got s=" + std::to_string(s) +
                              ", p=" + std::to_string(p));
    std::vector<int> idx(p);
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + s, idx.end(), [&](int a, int b) {
        const double da = v.v(a, a), db = v.v(b, b);
        return da > db || (da == db && a < b);
    });
    idx.resize(s);
    std::sort(idx.begin(), idx.end());
    return idx;
}

void orient_largest_positive(Vector& direction)
{
    if (direction.size() == 0)
        return;
    Eigen::Index arg = 0;
    for (Eigen::Index j = 1; j < direction.size(); ++j)
        if (std::abs(direction[j]) > std::abs(direction[arg]))
            arg = j;
    if (direction[arg] < 0.0)
        direction = -direction;
}

Vector principal_direction(const Matrix& v, const std::vector<int>& block)
{
    const int k = static_cast<int>(block.size());
    Matrix sub(k, k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
            sub(a, b) = v(block[a], block[b]);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(sub);
    if (eig.info() != Eigen::Success)
        throw NumericalError("principal_direction: eigendecomposition failed");
    Vector top = eig.eigenvectors().col(k - 1);
    orient_largest_positive(top);

    Vector out = Vector::Zero(v.rows());
    for (int a = 0; a < k; ++a)
        out[block[a]] = top[a];
    return out;
}

SignedSupport dt_sir(const SirMatrix& v, int s)
{
    const std::vector<int> selected = dt_select(v, s);
    return SignedSupport::of(principal_direction(v.v, selected));
}

bool signed_support_match(const SignedSupport& a, const SignedSupport& b)
{
    if (a.p() != b.p())
        throw InvalidArgument("signed_support_match: length mismatch (" + std::to_string(a.p()) +
                              " vs " + std::to_string(b.p()) + ")");
    bool same = true, flipped = true;
    for (int j = 0; j < a.p(); ++j) {
        same = same && a.signs[j] == b.signs[j];
        flipped = flipped && a.signs[j] == -b.signs[j];
    }
    return same || flipped;
}

}  // namespace sdr
