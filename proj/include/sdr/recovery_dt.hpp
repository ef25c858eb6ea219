#pragma once

#include <vector>

#include "sdr/sir_core.hpp"

namespace sdr {

/// Sign pattern over {-1, 0, +1}^p.
struct SignedSupport {
    std::vector<int> signs;

    int p() const { return static_cast<int>(signs.size()); }
    int s_hat() const;

    static SignedSupport of(const Vector& direction);
    static SignedSupport of(const SparseDirection& beta) { return of(beta.values); }
};

/// Indices (0-based, ascending) of the s largest diagonal entries of v.
/// Ties go to the lower index.
std::vector<int> dt_select(const SirMatrix& v, int s);

/// Diagonal thresholding followed by the principal eigenvector of the selected
/// block, oriented so its largest-magnitude entry is positive. No magnitude
/// threshold: every selected coordinate gets the sign of its eigenvector entry.
SignedSupport dt_sir(const SirMatrix& v, int s);

/// Principal eigenvector of v on `block` (0-based indices), oriented, embedded
/// into a length-p vector that is zero off the block.
Vector principal_direction(const Matrix& v, const std::vector<int>& block);

/// Flip so the first entry of largest magnitude is positive.
void orient_largest_positive(Vector& direction);

/// Equality up to a global sign flip. Throws InvalidArgument on length mismatch.
bool signed_support_match(const SignedSupport& a, const SignedSupport& b);

}  // namespace sdr
