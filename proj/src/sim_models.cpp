#include "sdr/sim_models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "sdr/errors.hpp"
#include "sdr/rng.hpp"

namespace sdr {

namespace {

std::string lower(std::string_view text)
{
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

ModelSpec ModelSpec::named(Link link, double noise_sd)
{
    if (link == Link::Custom)
        throw InvalidArgument("ModelSpec::named: use custom_link for custom links");
    if (!(noise_sd >= 0.0))
        throw InvalidArgument("noise_sd must be nonnegative");
    ModelSpec m;
    m.link = link;
    m.noise_sd = noise_sd;
    return m;
}

ModelSpec ModelSpec::custom_link(std::function<double(double, double)> f, double noise_sd,
                                 std::string label)
{
    if (!f)
        throw InvalidArgument("custom link function is empty");
    if (!(noise_sd >= 0.0))
        throw InvalidArgument("noise_sd must be nonnegative");
    ModelSpec m;
    m.link = Link::Custom;
    m.noise_sd = noise_sd;
    m.custom = std::move(f);
    m.custom_label = std::move(label);
    return m;
}

double ModelSpec::evaluate(double u, double eps) const
{
    switch (link) {
    case Link::Linear:
        return u + eps;
    case Link::SinPlusIdentity:
        return u + std::sin(u) + eps;
    case Link::Atan2:
        return 2.0 * std::atan(u) + eps;
    case Link::Cubic:
        return u * u * u + eps;
    case Link::Sinh:
        return std::sinh(u) + eps;
    case Link::Custom:
        return custom(u, eps);
    }
    return u + eps;
}

std::string ModelSpec::name() const
{
    return link == Link::Custom ? custom_label : link_name(link);
}

std::optional<Link> parse_link(std::string_view text)
{
    const std::string t = lower(text);
    if (t == "linear" || t == "6")
        return Link::Linear;
    if (t == "sin" || t == "sin_plus_identity" || t == "21")
        return Link::SinPlusIdentity;
    if (t == "atan" || t == "atan2" || t == "22")
        return Link::Atan2;
    if (t == "cubic" || t == "23")
        return Link::Cubic;
    if (t == "sinh" || t == "24")
        return Link::Sinh;
    return std::nullopt;
}

std::string link_name(Link link)
{
    switch (link) {
    case Link::Linear: return "linear";
    case Link::SinPlusIdentity: return "sin";
    case Link::Atan2: return "atan";
    case Link::Cubic: return "cubic";
    case Link::Sinh: return "sinh";
    case Link::Custom: return "custom";
    }
    return "unknown";
}

std::optional<BetaScheme> parse_beta_scheme(std::string_view text)
{
    const std::string t = lower(text);
    if (t == "fixed")
        return BetaScheme::Fixed;
    if (t == "uniform" || t == "random" || t == "random_uniform")
        return BetaScheme::RandomUniform;
    return std::nullopt;
}

std::string beta_scheme_name(BetaScheme scheme)
{
    return scheme == BetaScheme::Fixed ? "fixed" : "uniform";
}

SparseDirection generate_beta(int p, int s, BetaScheme scheme, std::uint64_t seed)
{
    if (p < 1)
        throw InvalidArgument("generate_beta: p must be positive");
    if (s < 1 || s > p)
        throw InvalidArgument("generate_beta: need 1 <= s <= p, got s=" + std::to_string(s) +
                              ", p=" + std::to_string(p));

    SparseDirection beta;
    beta.values = Vector::Zero(p);
    beta.support.resize(s);
    std::iota(beta.support.begin(), beta.support.end(), 0);

    if (scheme == BetaScheme::Fixed) {
        const double mag = 1.0 / std::sqrt(static_cast<double>(s));
        for (int j = 0; j < s; ++j)
            beta.values[j] = mag;
        // The last support entry carries the negative sign; a lone coordinate
        // stays positive.
        if (s > 1)
            beta.values[s - 1] = -mag;
        return beta;
    }

    Engine engine = make_engine(seed);
    const int positives = s / 2;
    for (int j = 0; j < s; ++j) {
        const double u = uniform(engine, 0.5, 1.0);
        beta.values[j] = j < positives ? u : -u;
    }
    double norm2 = 0.0;
    for (int j = 0; j < s; ++j)
        norm2 += beta.values[j] * beta.values[j];
    beta.values.head(s) /= std::sqrt(norm2);
    return beta;
}

Dataset sample_sim(const ModelSpec& model, const SparseDirection& beta, int n, std::uint64_t seed)
{
    if (n < 1)
        throw InvalidArgument("sample_sim: n must be positive");
    const int p = beta.p();
    Engine engine = make_engine(seed);

    Dataset data;
    data.x.resize(n, p);
    data.y.resize(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j)
            data.x(i, j) = standard_normal(engine);
    for (int i = 0; i < n; ++i) {
        double u = 0.0;
        for (int j : beta.support)
            u += data.x(i, j) * beta.values[j];
        const double eps = model.noise_sd * standard_normal(engine);
        data.y[i] = model.evaluate(u, eps);
    }
    data.provenance = {seed, std::string(kGeneratorName), "sample_sim/" + model.name()};
    return data;
}

ScalarSample draw_sorted_scalar(const ModelSpec& model, int count, std::uint64_t seed)
{
    if (count < 1)
        throw InvalidArgument("draw_sorted_scalar: count must be positive");
    Engine engine = make_engine(seed);
    Vector z(count), y(count);
    for (int i = 0; i < count; ++i) {
        z[i] = standard_normal(engine);
        const double eps = model.noise_sd * standard_normal(engine);
        y[i] = model.evaluate(z[i], eps);
    }
    std::vector<int> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return y[a] < y[b]; });

    ScalarSample out;
    out.z.resize(count);
    out.y.resize(count);
    for (int i = 0; i < count; ++i) {
        out.z[i] = z[order[i]];
        out.y[i] = y[order[i]];
    }
    return out;
}

double estimate_cv(const ModelSpec& model, int mc_n, int oracle_slices, std::uint64_t seed)
{
    if (oracle_slices < 1)
        throw InvalidArgument("estimate_cv: oracle_slices must be positive");
    if (mc_n < 100 * oracle_slices)
        throw InvalidArgument("estimate_cv: need mc_n >= 100 * oracle_slices");

    const int per_slice = mc_n / oracle_slices;
    const ScalarSample sample = draw_sorted_scalar(model, per_slice * oracle_slices, seed);

    double sum_sq = 0.0, grand = 0.0;
    for (int h = 0; h < oracle_slices; ++h) {
        const double mean = sample.z.segment(static_cast<Eigen::Index>(h) * per_slice, per_slice).mean();
        sum_sq += mean * mean;
        grand += mean;
    }
    const double H = oracle_slices;
    grand /= H;
    return std::max(0.0, sum_sq / H - grand * grand);
}

}  // namespace sdr
