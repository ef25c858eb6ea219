#include "sdr/recovery_sdp.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include <lapacke.h>

#include "sdr/errors.hpp"

namespace sdr {

namespace {

void mirror_upper(Matrix& m)
{
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = j + 1; i < m.rows(); ++i)
            m(i, j) = m(j, i);
}

bool is_symmetric(const Matrix& a)
{
    if (a.rows() != a.cols())
        return false;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = j + 1; i < a.rows(); ++i)
            if (std::abs(a(i, j) - a(j, i)) > 1e-12 * scale)
                return false;
    return true;
}

double spectral_norm_sym(const Matrix& a)
{
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
        throw NumericalError("sdp_solve: eigendecomposition failed");
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

Vector top_eigenvector(const Matrix& m)
{
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    if (eig.info() != Eigen::Success)
        throw NumericalError("eigendecomposition failed");
    return eig.eigenvectors().col(m.rows() - 1);
}

double soft(double x, double t)
{
    if (x > t)
        return x - t;
    if (x < -t)
        return x + t;
    return 0.0;
}

void finish(SdpSolution& sol, const Matrix& a, double lambda)
{
    sol.objective = sdp_objective(a, sol.z, lambda);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sol.z, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().maxCoeff();
    sol.rank1_gap = std::clamp(1.0 - top, 0.0, 1.0);
}

// Spectraplex projection through LAPACK dsyevr. Only eigenpairs that can
// receive positive simplex weight are needed; with a threshold hint from the
// previous call, eigenpairs above (hint - margin) are computed first and the
// full spectrum is used only when the threshold falls below that window.
class SpectraplexProjector {
public:
    Matrix operator()(const Matrix& m)
    {
        const auto p = static_cast<lapack_int>(m.rows());
        if (p == 0)
            throw InvalidArgument("project_spectraplex: empty matrix");
        if (hint_) {
            const double lower = *hint_ - std::max(margin_ * spread_, 1e-14);
            if (solve(m, 'V', lower) && theta_ >= lower) {
                margin_ = std::max(1e-6, 0.9 * margin_);
                return assemble(m.rows());
            }
            margin_ = std::min(1.0, 4.0 * margin_);
        }
        if (!solve(m, 'A', 0.0))
            throw NumericalError("project_spectraplex: eigendecomposition failed");
        return assemble(m.rows());
    }

    // Top eigenvector of the matrix last projected (and of the projection).
    Vector top_vector() const { return vectors_.col(count_ - 1); }

private:
    // Fills values_ (ascending) / vectors_ and the simplex threshold theta_.
    bool solve(const Matrix& m, char range, double lower)
    {
        const auto p = static_cast<lapack_int>(m.rows());
        work_ = m;
        values_.resize(p);
        vectors_.resize(p, p);
        support_.resize(2 * static_cast<std::size_t>(p));
        lapack_int found = 0;
        const double upper = std::numeric_limits<double>::max();
        const lapack_int info =
            LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', range, 'U', p, work_.data(), p, lower, upper, 0, 0, 0.0,
                           &found, values_.data(), vectors_.data(), p, support_.data());
        if (info != 0)
            return false;
        count_ = found;
        if (found == 0)
            return false;
        // Simplex threshold from the computed eigenvalues (descending scan).
        double cumsum = 0.0;
        theta_ = values_[found - 1] - 1.0;
        for (lapack_int j = found - 1; j >= 0; --j) {
            cumsum += values_[j];
            const double t = (cumsum - 1.0) / static_cast<double>(found - j);
            if (values_[j] - t > 0.0)
                theta_ = t;
        }
        hint_ = theta_;
        spread_ = values_[found - 1] - theta_;
        return true;
    }

    Matrix assemble(Eigen::Index p)
    {
        Eigen::Index first = count_;
        while (first > 0 && values_[first - 1] - theta_ > 0.0)
            --first;
        const Eigen::Index rank = count_ - first;
        Matrix scaled(p, rank);
        for (Eigen::Index k = 0; k < rank; ++k)
            scaled.col(k) = vectors_.col(first + k) * std::sqrt(values_[first + k] - theta_);
        Matrix out = Matrix::Zero(p, p);
        out.selfadjointView<Eigen::Upper>().rankUpdate(scaled);
        mirror_upper(out);
        return out;
    }

    Matrix work_;
    Vector values_;
    Matrix vectors_;
    std::vector<lapack_int> support_;
    Eigen::Index count_ = 0;
    double theta_ = 0.0;
    double spread_ = 0.0;
    double margin_ = 1e-2;
    std::optional<double> hint_;
};

struct Rank1Candidate {
    Vector v;
    double value = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
};

// Given a trial support and sign pattern taken from w, solves the face problem
// max v'(A_TT - lambda s s')v and bounds the full problem from above with a box
// dual U that agrees with s s' on T x T and cancels A v on the complement.
Rank1Candidate rank1_candidate(const Matrix& a, double lambda, const Vector& w, double rel)
{
    const Eigen::Index p = a.rows();
    const double wmax = w.cwiseAbs().maxCoeff();
    std::vector<Eigen::Index> t;
    for (Eigen::Index i = 0; i < p; ++i)
        if (std::abs(w[i]) >= rel * wmax)
            t.push_back(i);

    Vector sign(p);
    for (Eigen::Index i = 0; i < p; ++i)
        sign[i] = w[i] >= 0.0 ? 1.0 : -1.0;

    Rank1Candidate best;
    Vector v = Vector::Zero(p);
    std::vector<bool> in(static_cast<std::size_t>(p), false);
    for (int round = 0; round < 4 * static_cast<int>(p) + 8 && !t.empty(); ++round) {
        const auto k = static_cast<Eigen::Index>(t.size());
        Matrix face(k, k);
        for (Eigen::Index c = 0; c < k; ++c)
            for (Eigen::Index r = 0; r < k; ++r)
                face(r, c) = a(t[r], t[c]) - lambda * sign[t[r]] * sign[t[c]];
        Vector u = top_eigenvector(face);
        double orient = 0.0;
        for (Eigen::Index r = 0; r < k; ++r)
            orient += u[r] * sign[t[r]];
        if (orient < 0.0)
            u = -u;
        v.setZero();
        for (Eigen::Index r = 0; r < k; ++r)
            v[t[r]] = u[r];

        std::vector<Eigen::Index> next;
        bool consistent = true;
        for (Eigen::Index r = 0; r < k; ++r) {
            if (u[r] == 0.0 || (u[r] > 0.0) != (sign[t[r]] > 0.0))
                consistent = false;
            if (u[r] != 0.0) {
                next.push_back(t[r]);
                sign[t[r]] = u[r] > 0.0 ? 1.0 : -1.0;
            }
        }
        t = std::move(next);
        if (!consistent)
            continue;

        // Grow the support by the most violated zero row, if any.
        if (lambda == 0.0)
            break;
        std::fill(in.begin(), in.end(), false);
        for (auto i : t)
            in[static_cast<std::size_t>(i)] = true;
        const double l1 = v.cwiseAbs().sum();
        Eigen::Index worst = -1;
        double worst_c = 1.0 + 1e-12;
        for (Eigen::Index i = 0; i < p; ++i) {
            if (in[static_cast<std::size_t>(i)])
                continue;
            const double c = std::abs(a.row(i).dot(v)) / (lambda * l1);
            if (c > worst_c) {
                worst_c = c;
                worst = i;
            }
        }
        if (worst < 0)
            break;
        sign[worst] = a.row(worst).dot(v) >= 0.0 ? 1.0 : -1.0;
        t.push_back(worst);
        std::sort(t.begin(), t.end());
    }
    if (t.empty())
        return best;

    std::fill(in.begin(), in.end(), false);
    for (auto i : t)
        in[static_cast<std::size_t>(i)] = true;
    const double l1 = v.cwiseAbs().sum();
    Matrix u(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < p; ++i) {
            const bool ii = in[static_cast<std::size_t>(i)], jj = in[static_cast<std::size_t>(j)];
            if (ii && jj)
                u(i, j) = sign[i] * sign[j];
            else if (lambda == 0.0)
                u(i, j) = 0.0;
            else if (ii)
                u(i, j) = std::clamp(a.row(j).dot(v) / (lambda * l1), -1.0, 1.0) * sign[i];
            else if (jj)
                u(i, j) = std::clamp(a.row(i).dot(v) / (lambda * l1), -1.0, 1.0) * sign[j];
            else
                u(i, j) = std::clamp(a(i, j) / lambda, -1.0, 1.0);
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a - lambda * u, Eigen::EigenvaluesOnly);
    best.v = v;
    best.value = v.dot(a * v) - lambda * l1 * l1;
    best.upper = eig.eigenvalues()[p - 1];
    return best;
}

// Over-relaxation factor for the splitting iteration.
constexpr double kRelaxation = 1.6;
constexpr int kCertifyEvery = 25;
constexpr int kBalanceEvery = 50;
constexpr double kBalanceRatio = 10.0;
constexpr double kBalanceFactor = 2.0;
constexpr int kMaxAdaptations = 40;
constexpr double kCertifySupport = 1e-3;

// Scaled-form ADMM on Z = Y with Z in the spectraplex and the l1 penalty on Y:
//   Z  <- proj(Y - U + step A)
//   Zr <- alpha Z + (1 - alpha) Y
//   Y  <- soft(Zr + U, lambda step)
//   U  <- U + Zr - Y
// Every kCertifyEvery steps a rank-one candidate built from the current
// principal direction is checked against its box dual. Without a configured
// step, the step is rescaled whenever one residual dominates the other.
SdpSolution solve_splitting(const Matrix& a, const SdpConfig& cfg)
{
    const Eigen::Index p = a.rows();
    double step = cfg.step.value_or(0.0);
    const bool adaptive = !cfg.step;
    if (!cfg.step) {
        const double norm = spectral_norm_sym(a);
        step = kDefaultStepScale / (norm > 0.0 ? norm : 1.0);
    }
    int adaptations = 0;

    Matrix y = Matrix::Zero(p, p);
    Matrix u = Matrix::Zero(p, p);
    Matrix z = Matrix::Zero(p, p);
    Matrix y_prev(p, p), z_prev(p, p);
    SpectraplexProjector project;

    SdpSolution sol;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        z_prev = z;
        y_prev = y;
        z = project(y - u + step * a);
        const double thresh = cfg.lambda * step;
        const Matrix zr = kRelaxation * z + (1.0 - kRelaxation) * y_prev;
        for (Eigen::Index j = 0; j < p; ++j)
            for (Eigen::Index i = 0; i < p; ++i)
                y(i, j) = soft(zr(i, j) + u(i, j), thresh);
        u += zr - y;

        const double primal = (z - y).cwiseAbs().maxCoeff();
        const double dual = (y - y_prev).cwiseAbs().maxCoeff();
        const double change = (z - z_prev).cwiseAbs().maxCoeff();
        if (adaptive && it % kBalanceEvery == 0 && adaptations < kMaxAdaptations) {
            // Residual balancing: the dual residual scales with 1/step.
            const double scaled_dual = dual / step;
            if (primal > kBalanceRatio * scaled_dual) {
                step /= kBalanceFactor;
                u /= kBalanceFactor;
                ++adaptations;
            } else if (scaled_dual > kBalanceRatio * primal) {
                step *= kBalanceFactor;
                u *= kBalanceFactor;
                ++adaptations;
            }
        }
        sol.iterations = it;
        sol.residual = std::max({primal, dual, change});
        if (sol.residual < cfg.tol) {
            sol.converged = true;
            break;
        }
        // A rank-one face solution whose box dual closes the gap is optimal.
        if (it % kCertifyEvery == 0) {
            const Rank1Candidate c = rank1_candidate(a, cfg.lambda, project.top_vector(), kCertifySupport);
            if (c.v.size() && c.upper - c.value < cfg.tol) {
                z = c.v * c.v.transpose();
                sol.residual = std::max(0.0, c.upper - c.value);
                sol.converged = true;
                break;
            }
        }
    }
    sol.z = std::move(z);
    finish(sol, a, cfg.lambda);
    return sol;
}

// Maximizes the concave piecewise-linear phi(g) = tr(A(Z + gD)) - lambda sum|Z + gD|
// over g in [0, 1].
double exact_line_search(const Matrix& a, const Matrix& z, const Matrix& d, double lambda)
{
    double slope = (a.cwiseProduct(d)).sum();
    std::vector<std::pair<double, double>> kinks; // (breakpoint, slope drop)
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        for (Eigen::Index i = 0; i < z.rows(); ++i) {
            const double zij = z(i, j), dij = d(i, j);
            if (dij == 0.0)
                continue;
            const double dir = zij != 0.0 ? (zij > 0.0 ? 1.0 : -1.0) : (dij > 0.0 ? 1.0 : -1.0);
            slope -= lambda * dir * dij;
            if (zij != 0.0 && zij * dij < 0.0) {
                const double t = -zij / dij;
                if (t < 1.0)
                    kinks.emplace_back(t, 2.0 * lambda * std::abs(dij));
            }
        }
    }
    if (slope <= 0.0)
        return 0.0;
    std::sort(kinks.begin(), kinks.end());
    for (const auto& [t, drop] : kinks) {
        slope -= drop;
        if (slope <= 0.0)
            return t;
    }
    return 1.0;
}

// Golden-section maximization of a concave function on [lo, hi].
template <typename F>
double golden_max(F&& f, double lo, double hi, int iters, double& best)
{
    constexpr double r = 0.6180339887498949;
    double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int k = 0; k < iters; ++k) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    best = std::max(f1, f2);
    return f1 >= f2 ? x1 : x2;
}

// Maximizes the objective over {Q W Q' : W 2x2, W >= 0, tr W = 1}, the face
// spanned by two orthonormal columns. W = [[1/2 + x, y], [y, 1/2 - x]] ranges
// over the disk x^2 + y^2 <= 1/4 and the objective is concave in (x, y).
Matrix polish_on_plane(const Matrix& a, double lambda, const Matrix& q)
{
    auto value = [&](double x, double y) {
        Eigen::Matrix2d w;
        w << 0.5 + x, y, y, 0.5 - x;
        return sdp_objective(a, q * w * q.transpose(), lambda);
    };
    auto radius = [](double x) { return std::sqrt(std::max(0.0, 0.25 - x * x)); };
    auto inner = [&](double x) {
        double best = 0.0;
        const double r = radius(x);
        golden_max([&](double y) { return value(x, y); }, -r, r, 60, best);
        return best;
    };
    double best = 0.0;
    const double x = golden_max(inner, -0.5, 0.5, 60, best);
    const double r = radius(x);
    const double y = golden_max([&](double t) { return value(x, t); }, -r, r, 60, best);
    Eigen::Matrix2d w;
    w << 0.5 + x, y, y, 0.5 - x;
    Matrix z = q * w * q.transpose();
    mirror_upper(z);
    return z;
}

// Accelerated projected gradient on the entropy-smoothed box dual
//   min_{|U_ij| <= 1} mu log tr exp((A - lambda U) / mu),
// with mu lowered geometrically between stages. Every eigendecomposition yields a
// primal point (the softmax-weighted eigenprojector) and, when the evaluation
// point lies in the box, an upper bound lambda_max(A - lambda U).
class SmoothedDual {
public:
    SmoothedDual(const Matrix& a, double lambda, double tol)
        : a_(a), lambda_(lambda)
    {
        const Eigen::Index p = a.rows();
        u_ = (a / lambda).cwiseMax(-1.0).cwiseMin(1.0);
        y_ = u_;
        const double scale = std::max(spectral_norm_sym(a), 1e-300);
        mu_ = 1e-2 * scale;
        mu_end_ = std::max(tol / (2.0 * std::log(static_cast<double>(std::max<Eigen::Index>(p, 2)))),
                           1e-15 * scale);
    }

    // Runs up to `iters` gradient steps, stopping early once upper - lower < tol.
    void advance(int iters, double tol)
    {
        const Eigen::Index p = a_.rows();
        for (int k = 0; k < iters; ++k) {
            Eigen::SelfAdjointEigenSolver<Matrix> eig(a_ - lambda_ * y_);
            if (eig.info() != Eigen::Success)
                throw NumericalError("eigendecomposition failed");
            const Vector& ev = eig.eigenvalues();
            const double top = ev[p - 1];
            if (y_.cwiseAbs().maxCoeff() <= 1.0 && top < upper) {
                upper = top;
                u_best = y_;
            }
            Vector w = ((ev.array() - top) / mu_).exp();
            w /= w.sum();
            Matrix z = eig.eigenvectors() * w.asDiagonal() * eig.eigenvectors().transpose();
            mirror_upper(z);
            // Gradient in U is -lambda z; the step 1/L is mu / lambda^2.
            const Matrix next = (y_ + (mu_ / lambda_) * z).cwiseMax(-1.0).cwiseMin(1.0);
            const double value = sdp_objective(a_, z, lambda_);
            if (value > lower) {
                lower = value;
                z_best = std::move(z);
            }
            if (upper - lower < tol)
                return;
            if ((y_ - next).cwiseProduct(next - u_).sum() > 0.0) {
                momentum_ = 1.0;
                y_ = u_;
                continue;
            }
            const double t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum_ * momentum_));
            const double moved = (next - u_).cwiseAbs().maxCoeff();
            y_ = next + ((momentum_ - 1.0) / t) * (next - u_);
            u_ = next;
            momentum_ = t;
            if (mu_ > mu_end_ && moved < 1e-6 * mu_ / lambda_) {
                mu_ = std::max(0.1 * mu_, mu_end_);
                momentum_ = 1.0;
                y_ = u_;
            }
        }
    }

    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    Matrix z_best;
    Matrix u_best;

private:
    const Matrix& a_;
    double lambda_;
    Matrix u_, y_;
    double mu_ = 0.0, mu_end_ = 0.0;
    double momentum_ = 1.0;
};

// Frank-Wolfe over the spectraplex. The linear oracle is the top eigenvector of
// A - lambda U with U the (Huber-smoothed, width mu) subgradient of sum|Z_ij|;
// the step length is an exact line search on the unsmoothed objective. Any U in
// the unit box gives lambda_max(A - lambda U) >= optimum, so the reported gap is
// a true duality gap. Every few iterations two kinds of extra points are offered:
// rank-one atoms built on the support of the principal directions of Z (their
// box duals often close the gap exactly when the optimum is rank one with zero
// rows), and the primal iterate of a smoothed box-dual solver, which handles
// higher-rank optima.
SdpSolution solve_conditional_gradient(const Matrix& a, const SdpConfig& cfg)
{
    const Eigen::Index p = a.rows();
    const double mu = std::max(1e-14, 1e-3 * cfg.tol);
    constexpr int kCandidateEvery = 20;
    constexpr int kDualSteps = 400;
    constexpr Eigen::Index kCandidateSeeds = 3;
    static constexpr double kSupportLevels[] = {0.3, 0.1, 3e-2, 1e-2, 1e-3, 1e-4, 0.0};

    Vector v = top_eigenvector(a);
    Matrix z = v * v.transpose();
    Matrix g(p, p);

    auto step_to = [&](const Vector& atom) {
        const Matrix d = atom * atom.transpose() - z;
        const double gamma = exact_line_search(a, z, d, cfg.lambda);
        z += gamma * d;
        mirror_upper(z);
        return gamma * d.cwiseAbs().maxCoeff();
    };

    auto offer = [&](const Matrix& candidate) {
        if (sdp_objective(a, candidate, cfg.lambda) > sdp_objective(a, z, cfg.lambda))
            z = candidate;
    };

    std::optional<SmoothedDual> dual;
    if (cfg.lambda > 0.0)
        dual.emplace(a, cfg.lambda, cfg.tol);

    SdpSolution sol;
    double best_upper = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= cfg.max_iter; ++it) {
        sol.iterations = it;
        if (it % kCandidateEvery == 1) {
            Eigen::SelfAdjointEigenSolver<Matrix> ez(z);
            const Eigen::Index seeds = std::min<Eigen::Index>(kCandidateSeeds, p);
            for (Eigen::Index k = 0; k < seeds && !sol.converged; ++k) {
                const Vector w = ez.eigenvectors().col(p - 1 - k);
                for (double rel : kSupportLevels) {
                    Rank1Candidate c = rank1_candidate(a, cfg.lambda, w, rel);
                    if (c.v.size() == 0)
                        continue;
                    best_upper = std::min(best_upper, c.upper);
                    if (c.upper - c.value < cfg.tol) {
                        z = c.v * c.v.transpose();
                        sol.residual = c.upper - c.value;
                        sol.converged = true;
                        break;
                    }
                    if (c.value > sdp_objective(a, z, cfg.lambda))
                        step_to(c.v);
                }
            }
            if (sol.converged)
                break;
            if (dual) {
                dual->advance(kDualSteps, cfg.tol);
                best_upper = std::min(best_upper, dual->upper);
                if (dual->z_best.size())
                    offer(dual->z_best);
                if (p >= 2 && dual->u_best.size()) {
                    Eigen::SelfAdjointEigenSolver<Matrix> eu(a - cfg.lambda * dual->u_best);
                    offer(polish_on_plane(a, cfg.lambda, eu.eigenvectors().rightCols(2)));
                }
            }
            if (best_upper - sdp_objective(a, z, cfg.lambda) < cfg.tol) {
                sol.residual = std::max(0.0, best_upper - sdp_objective(a, z, cfg.lambda));
                sol.converged = true;
                break;
            }
            if (p >= 2) {
                // Planes through the principal direction of Z: its second
                // direction and the latest oracle atom.
                Eigen::SelfAdjointEigenSolver<Matrix> ep(z);
                Matrix q = ep.eigenvectors().rightCols(2);
                offer(polish_on_plane(a, cfg.lambda, q));
                q.col(0) = v - v.dot(q.col(1)) * q.col(1);
                if (q.col(0).norm() > 1e-8) {
                    q.col(0).normalize();
                    offer(polish_on_plane(a, cfg.lambda, q));
                }
            }
        }

        for (Eigen::Index j = 0; j < p; ++j)
            for (Eigen::Index i = 0; i < p; ++i)
                g(i, j) = a(i, j) - cfg.lambda * std::clamp(z(i, j) / mu, -1.0, 1.0);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
        if (eig.info() != Eigen::Success)
            throw NumericalError("eigendecomposition failed");
        v = eig.eigenvectors().col(p - 1);
        best_upper = std::min(best_upper, eig.eigenvalues()[p - 1]);
        const double gap = std::max(0.0, best_upper - sdp_objective(a, z, cfg.lambda));
        const double moved = step_to(v);
        sol.residual = std::max(gap, moved);
        if (gap < cfg.tol) {
            sol.converged = true;
            break;
        }
    }
    sol.z = std::move(z);
    finish(sol, a, cfg.lambda);
    return sol;
}

}  // namespace

std::optional<SdpBackend> parse_sdp_backend(std::string_view text)
{
    std::string t(text);
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "splitting" || t == "admm")
        return SdpBackend::SplittingMethod;
    if (t == "cg" || t == "conditional_gradient" || t == "frank_wolfe")
        return SdpBackend::ConditionalGradient;
    return std::nullopt;
}

std::string sdp_backend_name(SdpBackend backend)
{
    return backend == SdpBackend::SplittingMethod ? "splitting" : "conditional_gradient";
}

void SdpConfig::validate() const
{
    if (!(lambda >= 0.0))
        throw InvalidArgument("sdp: lambda must be nonnegative");
    if (max_iter < 1)
        throw InvalidArgument("sdp: max_iter must be at least 1");
    if (!(tol > 0.0))
        throw InvalidArgument("sdp: tol must be positive");
    if (step && !(*step > 0.0))
        throw InvalidArgument("sdp: step must be positive");
}

Vector project_simplex(const Vector& v)
{
    const Eigen::Index k = v.size();
    std::vector<double> sorted(v.data(), v.data() + k);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumsum = 0.0, theta = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
        cumsum += sorted[j];
        const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (sorted[j] - t > 0.0)
            theta = t;
    }
    return (v.array() - theta).max(0.0);
}

Matrix project_spectraplex(const Matrix& m)
{
    if (m.rows() != m.cols())
        throw InvalidArgument("project_spectraplex: matrix is not square");
    SpectraplexProjector projector;
    return projector(m);
}

double sdp_objective(const Matrix& a, const Matrix& z, double lambda)
{
    return a.cwiseProduct(z).sum() - lambda * z.cwiseAbs().sum();
}

SdpSolution sdp_solve(const Matrix& a, const SdpConfig& cfg)
{
    cfg.validate();
    if (a.rows() == 0 || !is_symmetric(a))
        throw InvalidArgument("sdp_solve: input matrix must be square and symmetric");
    return cfg.backend == SdpBackend::SplittingMethod ? solve_splitting(a, cfg)
                                                      : solve_conditional_gradient(a, cfg);
}

SdpSolution sdp_solve(const SirMatrix& a, const SdpConfig& cfg)
{
    return sdp_solve(a.v, cfg);
}

Vector sdp_principal_vector(const SdpSolution& sol)
{
    Vector v = top_eigenvector(sol.z);
    orient_largest_positive(v);
    return v;
}

SignedSupport sdp_sign_recover(const SdpSolution& sol, int s)
{
    if (s < 1)
        throw InvalidArgument("sdp_sign_recover: s must be positive");
    SignedSupport out;
    out.signs.assign(static_cast<std::size_t>(sol.z.rows()), 0);
    if (sol.z.rows() > 1) {
        // A repeated top eigenvalue leaves the direction unidentified: report no support.
        Eigen::SelfAdjointEigenSolver<Matrix> eig(sol.z, Eigen::EigenvaluesOnly);
        const Vector& ev = eig.eigenvalues();
        const Eigen::Index last = ev.size() - 1;
        if (ev[last] - ev[last - 1] <= 1e-12 * std::max(1.0, std::abs(ev[last])))
            return out;
    }
    const Vector v = sdp_principal_vector(sol);
    const double cut = 0.5 / std::sqrt(static_cast<double>(s));
    for (Eigen::Index j = 0; j < v.size(); ++j)
        out.signs[j] = std::abs(v[j]) < cut ? 0 : (v[j] > 0.0 ? 1 : -1);
    return out;
}

bool check_rank1_certificate(const Matrix& a, double lambda, const SdpSolution& sol, double tol)
{
    if (!(sol.rank1_gap < tol))
        throw CertificateUndefined("rank-1 certificate undefined: rank1_gap " +
                                   std::to_string(sol.rank1_gap) + " is not below " +
                                   std::to_string(tol));
    const Eigen::Index p = a.rows();
    const Vector zhat = sdp_principal_vector(sol);
    std::vector<int> sign(p);
    for (Eigen::Index j = 0; j < p; ++j)
        sign[j] = std::abs(zhat[j]) <= tol ? 0 : (zhat[j] > 0.0 ? 1 : -1);

    Matrix u(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < p; ++i) {
            if (sign[i] != 0 && sign[j] != 0) {
                u(i, j) = sign[i] * sign[j];
                continue;
            }
            if (std::abs(a(i, j)) > lambda * (1.0 + tol))
                return false;
            u(i, j) = lambda > 0.0 ? std::clamp(a(i, j) / lambda, -1.0, 1.0) : 0.0;
        }
    }
    const Vector w = top_eigenvector(a - lambda * u);
    const double along = w.dot(zhat);
    const double across = (w - along * zhat).norm();
    return std::atan2(across, std::abs(along)) <= tol;
}

bool check_rank1_certificate(const SirMatrix& a, double lambda, const SdpSolution& sol, double tol)
{
    return check_rank1_certificate(a.v, lambda, sol, tol);
}

double default_lambda(const Matrix& a, int s)
{
    const Eigen::Index p = a.rows();
    if (s < 1 || s > p)
        throw InvalidArgument("default_lambda: need 1 <= s <= p, got s=" + std::to_string(s) +
                              ", p=" + std::to_string(p));
    std::vector<double> diag(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j)
        diag[static_cast<std::size_t>(j)] = a(j, j);
    std::nth_element(diag.begin(), diag.begin() + (s - 1), diag.end(), std::greater<>());
    return 0.5 * std::max(0.0, diag[s - 1]);
}

double default_lambda(const SirMatrix& a, int s)
{
    return default_lambda(a.v, s);
}

}  // namespace sdr
