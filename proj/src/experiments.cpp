#include "sdr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include <boost/random/uniform_int_distribution.hpp>

#include "sdr/errors.hpp"
#include "sdr/rng.hpp"

namespace sdr {

std::optional<Method> parse_method(std::string_view text)
{
    std::string t(text);
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "dtsir" || t == "dt-sir" || t == "dt_sir" || t == "dt")
        return Method::DtSir;
    if (t == "sdp")
        return Method::Sdp;
    return std::nullopt;
}

std::string method_name(Method method)
{
    return method == Method::DtSir ? "dtsir" : "sdp";
}

int CurveConfig::sparsity() const
{
    switch (sparsity_rule) {
    case SparsityRule::SqrtP:
        return std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(p)))));
    case SparsityRule::LogP:
        return std::max(1, static_cast<int>(std::lround(std::log(static_cast<double>(p)))));
    case SparsityRule::Explicit:
        return explicit_s;
    }
    return explicit_s;
}

void CurveConfig::validate() const
{
    if (p < 2)
        throw InvalidArgument("curve: p must be at least 2");
    const int s = sparsity();
    if (s < 1 || s > p)
        throw InvalidArgument("curve: sparsity must satisfy 1 <= s <= p, got s=" + std::to_string(s));
    if (p - s < 2)
        throw InvalidArgument("curve: need p - s >= 2 so that log(p - s) > 0");
    if (h < 2)
        throw InvalidArgument("curve: need at least 2 slices");
    if (reps < 1)
        throw InvalidArgument("curve: reps must be at least 1");
    if (workers < 1)
        throw InvalidArgument("curve: workers must be at least 1");
    if (gamma_grid.empty())
        throw InvalidArgument("curve: gamma grid is empty");
    for (std::size_t k = 0; k < gamma_grid.size(); ++k) {
        if (!(gamma_grid[k] >= 0.0) || !std::isfinite(gamma_grid[k]))
            throw InvalidArgument("curve: gamma values must be finite and nonnegative");
        if (k > 0 && !(gamma_grid[k] > gamma_grid[k - 1]))
            throw InvalidArgument("curve: gamma grid must be strictly increasing");
    }
    if (lambda && !(*lambda >= 0.0))
        throw InvalidArgument("curve: lambda must be nonnegative");
    SdpConfig probe = sdp;
    probe.lambda = lambda.value_or(0.0);
    probe.validate();
}

long sample_size_for(double gamma, int s, int p)
{
    return static_cast<long>(std::ceil(gamma * s * std::log(static_cast<double>(p - s))));
}

bool run_replicate(const CurveConfig& cfg, int s, long n, std::uint64_t seed)
{
    const SparseDirection beta = generate_beta(cfg.p, s, cfg.beta_scheme, derive_seed(seed, 0));
    const Dataset data = sample_sim(cfg.model, beta, static_cast<int>(n), derive_seed(seed, 1));

    SirMatrix v;
    try {
        v = compute_sir(data, cfg.h, cfg.estimator_mode, derive_seed(seed, 2));
    } catch (const NumericalError&) {
        return false; // e.g. whitening with n <= p
    }

    SignedSupport estimate;
    if (cfg.method == Method::DtSir) {
        estimate = dt_sir(v, s);
    } else {
        SdpConfig sdp = cfg.sdp;
        sdp.lambda = cfg.lambda.value_or(default_lambda(v, s));
        const SdpSolution sol = sdp_solve(v, sdp);
        if (!sol.converged)
            return false;
        estimate = sdp_sign_recover(sol, s);
    }
    return signed_support_match(estimate, SignedSupport::of(beta));
}

EfficiencyCurve run_curve(const CurveConfig& cfg)
{
    cfg.validate();
    EfficiencyCurve curve;
    curve.config = cfg;
    curve.s = cfg.sparsity();

    struct Task {
        std::size_t point;
        int rep;
    };
    std::vector<Task> tasks;
    for (std::size_t k = 0; k < cfg.gamma_grid.size(); ++k) {
        CurvePoint pt;
        pt.gamma = cfg.gamma_grid[k];
        pt.n = sample_size_for(pt.gamma, curve.s, cfg.p);
        pt.reps = cfg.reps;
        pt.skipped = pt.n < 2L * cfg.h;
        curve.points.push_back(pt);
        if (!pt.skipped)
            for (int r = 0; r < cfg.reps; ++r)
                tasks.push_back({k, r});
    }

    std::vector<char> success(tasks.size(), 0);
    std::vector<double> seconds(tasks.size(), 0.0);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size())
                return;
            const Task& t = tasks[i];
            const auto start = std::chrono::steady_clock::now();
            try {
                const std::uint64_t seed = derive_seed(cfg.master_seed, t.point, static_cast<std::uint64_t>(t.rep));
                success[i] = run_replicate(cfg, curve.s, curve.points[t.point].n, seed);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next.store(tasks.size());
                return;
            }
            seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    };

    const int threads = std::min<int>(cfg.workers, static_cast<int>(std::max<std::size_t>(1, tasks.size())));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    for (std::size_t i = 0; i < tasks.size(); ++i) {
        CurvePoint& pt = curve.points[tasks[i].point];
        pt.successes += success[i];
        pt.wall_seconds += seconds[i];
    }
    for (CurvePoint& pt : curve.points)
        pt.success_rate = pt.skipped ? 0.0 : static_cast<double>(pt.successes) / pt.reps;
    return curve;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++k;
    }
    if (k < 2)
        return 0.0;
    const double denom = k * sxx - sx * sx;
    return denom != 0.0 ? (k * sxy - sx * sy) / denom : 0.0;
}

StabilityDiagnostic stability_diagnostic(const ModelSpec& model, const std::vector<int>& h_grid,
                                         int mc_n, std::uint64_t seed)
{
    if (h_grid.empty())
        throw InvalidArgument("stability_diagnostic: empty slice grid");
    for (int h : h_grid)
        if (h < 2)
            throw InvalidArgument("stability_diagnostic: every H must be at least 2");
    const int h_max = *std::max_element(h_grid.begin(), h_grid.end());
    if (static_cast<long>(mc_n) < 1000L * h_max)
        throw InvalidArgument("stability_diagnostic: need mc_n >= 1000 * max(H), got mc_n=" +
                              std::to_string(mc_n));

    StabilityDiagnostic out;
    out.h_grid = h_grid;
    const ScalarSample sample = draw_sorted_scalar(model, mc_n, seed);
    const int oracle_slices = std::min(kDefaultOracleSlices, mc_n / 100);
    out.total_variance = estimate_cv(model, mc_n, oracle_slices, derive_seed(seed, 1));

    for (std::size_t g = 0; g < h_grid.size(); ++g) {
        const int H = h_grid[g];
        const int inner = kInnerSliceFactor * H;
        const int per_inner = mc_n / inner;
        const int dropped = mc_n - inner * per_inner;

        std::vector<char> keep(mc_n, 1);
        if (dropped > 0) {
            Engine engine = make_engine(derive_seed(seed, 2, g));
            std::vector<int> positions(mc_n);
            std::iota(positions.begin(), positions.end(), 0);
            for (int i = 0; i < dropped; ++i) {
                boost::random::uniform_int_distribution<int> pick(i, mc_n - 1);
                std::swap(positions[i], positions[pick(engine)]);
                keep[positions[i]] = 0;
            }
        }
        std::vector<int> used;
        used.reserve(static_cast<std::size_t>(inner) * per_inner);
        for (int i = 0; i < mc_n; ++i)
            if (keep[i])
                used.push_back(i);

        std::vector<double> inner_mean(inner), inner_var(inner);
        for (int l = 0; l < inner; ++l) {
            double sum = 0.0, sum_sq = 0.0;
            for (int i = 0; i < per_inner; ++i) {
                const double z = sample.z[used[static_cast<std::size_t>(l) * per_inner + i]];
                sum += z;
                sum_sq += z * z;
            }
            const double mean = sum / per_inner;
            inner_mean[l] = mean;
            inner_var[l] = std::max(0.0, (sum_sq - per_inner * mean * mean) / (per_inner - 1));
        }

        std::vector<double> variances(H), boundaries;
        double total = 0.0, se_sq = 0.0;
        const double L = kInnerSliceFactor;
        for (int h = 0; h < H; ++h) {
            double abar = 0.0, noise = 0.0;
            for (int l = 0; l < kInnerSliceFactor; ++l) {
                abar += inner_mean[h * kInnerSliceFactor + l];
                noise += inner_var[h * kInnerSliceFactor + l];
            }
            abar /= L;
            noise /= L * per_inner;
            double between = 0.0;
            for (int l = 0; l < kInnerSliceFactor; ++l) {
                const double d = inner_mean[h * kInnerSliceFactor + l] - abar;
                between += d * d;
            }
            between /= L;
            variances[h] = std::max(0.0, between - (L - 1.0) / L * noise);
            total += variances[h];
            const double se = std::sqrt(2.0 / (L - 1.0)) * between;
            se_sq += se * se;
            if (h + 1 < H) {
                const std::size_t last = static_cast<std::size_t>(h + 1) * kInnerSliceFactor * per_inner - 1;
                boundaries.push_back(sample.y[used[last]]);
            }
        }
        out.per_slice_variances.push_back(std::move(variances));
        out.slice_boundaries.push_back(std::move(boundaries));
        out.sums.push_back(total);
        out.sum_se.push_back(std::sqrt(se_sq));
        out.mean_decay.push_back(total / H);
        out.mean_decay_se.push_back(std::sqrt(se_sq) / H);
    }

    std::vector<double> hs(h_grid.begin(), h_grid.end());
    out.kappa_fit = log_log_slope(hs, out.sums);

    constexpr int kBootstrap = 2000;
    Engine engine = make_engine(derive_seed(seed, 3));
    std::vector<double> slopes(kBootstrap), perturbed(out.sums.size());
    for (int b = 0; b < kBootstrap; ++b) {
        for (std::size_t g = 0; g < out.sums.size(); ++g)
            perturbed[g] = std::max(1e-300, out.sums[g] + out.sum_se[g] * standard_normal(engine));
        slopes[b] = log_log_slope(hs, perturbed);
    }
    std::sort(slopes.begin(), slopes.end());
    out.kappa_upper95 = slopes[static_cast<std::size_t>(0.95 * (kBootstrap - 1))];
    return out;
}

}  // namespace sdr
