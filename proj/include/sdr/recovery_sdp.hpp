#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "sdr/recovery_dt.hpp"

namespace sdr {

inline constexpr double kDefaultStepScale = 1.0;

enum class SdpBackend { SplittingMethod, ConditionalGradient };

std::optional<SdpBackend> parse_sdp_backend(std::string_view text);
std::string sdp_backend_name(SdpBackend backend);

struct SdpConfig {
    double lambda = 0.0;
    int max_iter = 20000;
    double tol = 1e-7;
    // Splitting step (inverse penalty). Unset means start at kDefaultStepScale / ||A||_2
    // and rebalance primal and dual residuals during the run; a set value stays fixed.
    std::optional<double> step;
    SdpBackend backend = SdpBackend::SplittingMethod;

    void validate() const;
};

/// Solution of  max tr(AZ) - lambda * sum_ij |Z_ij|  over the spectraplex
/// {Z >= 0, tr Z = 1}. The returned z is always feasible, also when the solver
/// stopped at max_iter.
struct SdpSolution {
    Matrix z;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;
    double rank1_gap = 1.0; // 1 - lambda_max(z)
};

/// Frobenius projection onto {Z >= 0, tr Z = 1}: eigendecompose, project the
/// spectrum onto the probability simplex, reassemble.
Matrix project_spectraplex(const Matrix& m);

/// Euclidean projection of a vector onto the probability simplex.
Vector project_simplex(const Vector& v);

double sdp_objective(const Matrix& a, const Matrix& z, double lambda);

SdpSolution sdp_solve(const Matrix& a, const SdpConfig& cfg);
SdpSolution sdp_solve(const SirMatrix& a, const SdpConfig& cfg);

/// Principal eigenvector of z, oriented largest-|entry| positive.
Vector sdp_principal_vector(const SdpSolution& sol);

/// Signs of the principal eigenvector of z; entries below 1/(2 sqrt(s)) in
/// magnitude map to 0.
SignedSupport sdp_sign_recover(const SdpSolution& sol, int s);

/// Checks the dual certificate for a numerically rank-1 solution z = zhat zhat':
/// U = sign(zhat) sign(zhat)' on the support block, clamp(A/lambda, -1, 1) off
/// it. True iff every off-block |A_ij| <= lambda (1 + tol) and zhat is the
/// principal eigenvector of A - lambda U within angle tol. Throws
/// CertificateUndefined when rank1_gap >= tol.
bool check_rank1_certificate(const Matrix& a, double lambda, const SdpSolution& sol, double tol);
bool check_rank1_certificate(const SirMatrix& a, double lambda, const SdpSolution& sol, double tol);

/// Half of the s-th largest diagonal entry of a.
double default_lambda(const SirMatrix& a, int s);
double default_lambda(const Matrix& a, int s);

}  // namespace sdr
