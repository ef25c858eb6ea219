#include "sdr/cli_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sdr/errors.hpp"
#include "sdr/rng.hpp"

namespace sdr {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

std::string unquote(std::string_view s)
{
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        s = s.substr(1, s.size() - 2);
    return std::string(s);
}

bool is_missing(std::string_view cell)
{
    if (cell.empty())
        return true;
    std::string t(cell);
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return t == "na" || t == "nan" || t == "null";
}

std::optional<double> parse_number(std::string_view cell)
{
    if (!cell.empty() && cell.front() == '+')
        cell.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value))
        return std::nullopt;
    return value;
}

const std::string* lookup(const Settings& settings, const std::string& key)
{
    const auto it = settings.find(key);
    return it == settings.end() ? nullptr : &it->second;
}

double get_double(const Settings& settings, const std::string& key, double fallback)
{
    const std::string* v = lookup(settings, key);
    if (!v)
        return fallback;
    const auto parsed = parse_number(trim(*v));
    if (!parsed)
        throw InvalidArgument("setting '" + key + "': not a number: '" + *v + "'");
    return *parsed;
}

long get_long(const Settings& settings, const std::string& key, long fallback)
{
    const std::string* v = lookup(settings, key);
    if (!v)
        return fallback;
    const std::string_view t = trim(*v);
    long value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw InvalidArgument("setting '" + key + "': not an integer: '" + *v + "'");
    return value;
}

int get_int(const Settings& settings, const std::string& key, int fallback)
{
    const long v = get_long(settings, key, fallback);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw InvalidArgument("setting '" + key + "': out of range");
    return static_cast<int>(v);
}

}  // namespace

// ---------------------------------------------------------------------------

Dataset IngestedTable::as_dataset() const
{
    Dataset d;
    d.x = x;
    d.y = y;
    d.provenance = {0, "ingested", "csv"};
    return d;
}

IngestedTable parse_csv(std::istream& in, std::string_view y_column, std::string_view source)
{
    std::string line;
    if (!std::getline(in, line))
        throw InvalidArgument(std::string(source) + ": empty file, a header row is required");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();

    std::vector<std::string> header;
    for (std::string_view cell : split(line, ','))
        header.push_back(unquote(cell));
    int y_index = -1;
    IngestedTable table;
    table.y_column = std::string(y_column);
    std::vector<int> x_index;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& name = header[c];
        if (name == y_column && y_index < 0) {
            y_index = static_cast<int>(c);
        } else {
            table.columns.push_back(name);
            x_index.push_back(static_cast<int>(c));
        }
    }
    if (y_index < 0)
        throw InvalidArgument(std::string(source) + ": missing column '" + std::string(y_column) + "'");
    if (table.columns.empty())
        throw InvalidArgument(std::string(source) + ": no predictor columns besides '" +
                              std::string(y_column) + "'");

    std::vector<double> values;
    std::vector<double> ys;
    int row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty())
            continue;
        ++row;
        const auto cells = split(line, ',');
        if (cells.size() != header.size())
            throw InvalidArgument(std::string(source) + ": row " + std::to_string(row) + " has " +
                                  std::to_string(cells.size()) + " cells, header has " +
                                  std::to_string(header.size()));
        bool missing = false;
        std::vector<double> parsed(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (is_missing(cells[c])) {
                missing = true;
                continue;
            }
            const auto v = parse_number(cells[c]);
            if (!v)
                throw InvalidArgument(std::string(source) + ": non-numeric value '" +
                                      std::string(cells[c]) + "' at row " + std::to_string(row) +
                                      ", column \"" + header[c] + "\"");
            parsed[c] = *v;
        }
        if (missing) {
            ++table.rejected_rows;
            continue;
        }
        ys.push_back(parsed[y_index]);
        for (int c : x_index)
            values.push_back(parsed[c]);
    }

    table.rows = static_cast<int>(ys.size());
    if (table.rows < 2)
        throw InvalidArgument(std::string(source) + ": fewer than 2 complete rows (" +
                              std::to_string(table.rejected_rows) + " rejected for missing values)");
    const int p = static_cast<int>(table.columns.size());
    table.y = Eigen::Map<const Vector>(ys.data(), table.rows);
    table.x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), table.rows, p);
    return table;
}

IngestedTable ingest_csv(const std::filesystem::path& path, std::string_view y_column)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    return parse_csv(in, y_column, path.string());
}

std::string format_double(double value)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

void write_dataset_csv(const Dataset& data, std::ostream& out, const std::vector<std::string>& names)
{
    const int p = data.p();
    out << "y";
    for (int j = 0; j < p; ++j)
        out << ',' << (j < static_cast<int>(names.size()) ? names[j] : "x" + std::to_string(j + 1));
    out << '\n';
    for (int i = 0; i < data.n(); ++i) {
        out << format_double(data.y[i]);
        for (int j = 0; j < p; ++j)
            out << ',' << format_double(data.x(i, j));
        out << '\n';
    }
}

void write_vector_csv(const Vector& v, std::string_view header, std::ostream& out)
{
    out << header << '\n';
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out << format_double(v[i]) << '\n';
}

Matrix read_matrix_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty())
            continue;
        ++row;
        std::vector<double> values;
        for (std::string_view cell : split(line, ',')) {
            const auto v = parse_number(cell);
            if (!v)
                throw InvalidArgument(path.string() + ": non-numeric value '" + std::string(cell) +
                                      "' in row " + std::to_string(row));
            values.push_back(*v);
        }
        rows.push_back(std::move(values));
    }
    const std::size_t p = rows.size();
    if (p == 0)
        throw InvalidArgument(path.string() + ": empty matrix");
    Matrix m(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        if (rows[i].size() != p)
            throw InvalidArgument(path.string() + ": matrix must be square (row " + std::to_string(i + 1) +
                                  " has " + std::to_string(rows[i].size()) + " entries, expected " +
                                  std::to_string(p) + ")");
        for (std::size_t j = 0; j < p; ++j)
            m(i, j) = rows[i][j];
    }
    return m;
}

void write_matrix_csv(const Matrix& m, std::ostream& out)
{
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out << (j ? "," : "") << format_double(m(i, j));
        out << '\n';
    }
}

// ---------------------------------------------------------------------------

std::optional<RecoveryMethod> parse_recovery_method(std::string_view text)
{
    std::string t(text);
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "dt" || t == "dtsir" || t == "dt-sir")
        return RecoveryMethod::Dt;
    if (t == "sdp")
        return RecoveryMethod::Sdp;
    return std::nullopt;
}

RankedReport recover_real(const IngestedTable& table, int s, int h, RecoveryMethod method,
                          std::uint64_t seed, const SdpConfig& sdp, std::optional<double> lambda)
{
    const int p = static_cast<int>(table.columns.size());
    if (s < 1 || s > p)
        throw InvalidArgument("recover: need 1 <= s <= p, got s=" + std::to_string(s) +
                              ", p=" + std::to_string(p));
    if (table.rows <= p)
        throw RankDeficient("recover: whitening needs n > p (got n=" + std::to_string(table.rows) +
                            ", p=" + std::to_string(p) +
                            "); whiten the design externally, e.g. with a sparse precision estimate");

    const SirMatrix v = sir_matrix_whitened(table.as_dataset(), h, seed);

    RankedReport report;
    report.method = method;
    report.s = s;
    report.h = h;
    report.rows.resize(p);
    std::vector<int> selected;
    Vector direction;

    if (method == RecoveryMethod::Dt) {
        selected = dt_select(v, s);
        direction = principal_direction(v.v, selected);
        for (int j = 0; j < p; ++j)
            report.rows[j].score = v.v(j, j);
    } else {
        SdpConfig cfg = sdp;
        cfg.lambda = lambda.value_or(default_lambda(v, s));
        report.lambda = cfg.lambda;
        const SdpSolution sol = sdp_solve(v, cfg);
        report.converged = sol.converged;
        direction = sdp_principal_vector(sol);
        for (int j = 0; j < p; ++j)
            report.rows[j].score = std::abs(direction[j]);
    }

    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return report.rows[a].score > report.rows[b].score; });
    if (method == RecoveryMethod::Sdp)
        selected.assign(order.begin(), order.begin() + s);

    std::vector<char> is_selected(p, 0);
    for (int j : selected)
        is_selected[j] = 1;
    int rank = 0;
    for (int j : order) {
        ReportRow& row = report.rows[j];
        row.name = table.columns[j];
        row.column = j;
        row.selected = is_selected[j];
        row.rank = row.selected ? ++rank : 0;
        row.sign = row.selected ? (direction[j] > 0.0) - (direction[j] < 0.0) : 0;
    }
    return report;
}

void write_report_csv(const RankedReport& report, std::ostream& out)
{
    out << "variable,column,score,rank,selected,sign\n";
    std::vector<const ReportRow*> rows;
    for (const ReportRow& r : report.rows)
        rows.push_back(&r);
    std::stable_sort(rows.begin(), rows.end(), [](const ReportRow* a, const ReportRow* b) {
        return a->score > b->score;
    });
    for (const ReportRow* r : rows) {
        out << r->name << ',' << r->column + 1 << ',' << format_double(r->score) << ',';
        if (r->selected)
            out << r->rank;
        out << ',' << (r->selected ? "true" : "false") << ',' << r->sign << '\n';
    }
}

// ---------------------------------------------------------------------------

void write_curve_csv(const EfficiencyCurve& curve, std::ostream& out)
{
    const CurveConfig& cfg = curve.config;
    out << kCurveHeader << '\n';
    std::vector<const CurvePoint*> points;
    for (const CurvePoint& pt : curve.points)
        points.push_back(&pt);
    std::stable_sort(points.begin(), points.end(),
                     [](const CurvePoint* a, const CurvePoint* b) { return a->gamma < b->gamma; });
    for (const CurvePoint* pt : points) {
        out << cfg.model.name() << ',' << cfg.p << ',' << curve.s << ',' << method_name(cfg.method) << ','
            << sir_mode_name(cfg.estimator_mode) << ',' << cfg.h << ',' << format_double(pt->gamma) << ','
            << pt->n << ',' << pt->reps << ',' << pt->successes << ',';
        if (!pt->skipped)
            out << format_double(pt->success_rate);
        out << ',' << (pt->skipped ? "true" : "false") << '\n';
    }
}

void emit_curve_csv(const EfficiencyCurve& curve, const std::filesystem::path& path)
{
    std::ostringstream out;
    write_curve_csv(curve, out);
    write_text_file(path, out.str());
}

void write_diagnostic_slices_csv(const StabilityDiagnostic& diag, std::string_view model, std::ostream& out)
{
    out << "model,H,slice,variance,upper_boundary\n";
    for (std::size_t g = 0; g < diag.h_grid.size(); ++g) {
        const auto& vars = diag.per_slice_variances[g];
        for (std::size_t h = 0; h < vars.size(); ++h) {
            out << model << ',' << diag.h_grid[g] << ',' << h + 1 << ',' << format_double(vars[h]) << ',';
            if (h < diag.slice_boundaries[g].size())
                out << format_double(diag.slice_boundaries[g][h]);
            out << '\n';
        }
    }
}

void write_diagnostic_summary_csv(const StabilityDiagnostic& diag, std::string_view model, std::ostream& out)
{
    out << "model,H,sum,sum_se,mean_decay,mean_decay_se,total_variance,kappa_fit,kappa_upper95\n";
    for (std::size_t g = 0; g < diag.h_grid.size(); ++g)
        out << model << ',' << diag.h_grid[g] << ',' << format_double(diag.sums[g]) << ','
            << format_double(diag.sum_se[g]) << ',' << format_double(diag.mean_decay[g]) << ','
            << format_double(diag.mean_decay_se[g]) << ',' << format_double(diag.total_variance) << ','
            << format_double(diag.kappa_fit) << ',' << format_double(diag.kappa_upper95) << '\n';
}

// ---------------------------------------------------------------------------

Settings read_config_section(const std::filesystem::path& path, std::string_view command)
{
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InvalidArgument("config '" + path.string() + "': " + e.message() + " (line " +
                              std::to_string(e.line()) + ")");
    }
    Settings out;
    const auto section = tree.get_child_optional(std::string(command));
    if (!section)
        return out;
    for (const auto& [key, value] : *section)
        out[key] = value.get_value<std::string>();
    return out;
}

std::vector<double> parse_double_list(std::string_view text)
{
    std::vector<double> out;
    for (std::string_view cell : split(text, ',')) {
        if (cell.empty())
            continue;
        const auto v = parse_number(cell);
        if (!v)
            throw InvalidArgument("not a number in list: '" + std::string(cell) + "'");
        out.push_back(*v);
    }
    return out;
}

std::vector<int> parse_int_list(std::string_view text)
{
    std::vector<int> out;
    for (std::string_view cell : split(text, ',')) {
        if (cell.empty())
            continue;
        int value = 0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
        if (ec != std::errc() || ptr != cell.data() + cell.size())
            throw InvalidArgument("not an integer in list: '" + std::string(cell) + "'");
        out.push_back(value);
    }
    return out;
}

ModelSpec model_from(const Settings& settings)
{
    const std::string* name = lookup(settings, "model");
    const Link link = name ? parse_link(trim(*name)).value_or(Link::Custom) : Link::Atan2;
    if (link == Link::Custom)
        throw InvalidArgument("unknown model '" + *name + "' (expected linear, sin, atan, cubic, sinh)");
    return ModelSpec::named(link, get_double(settings, "noise-sd", 1.0));
}

SdpConfig sdp_config_from(const Settings& settings)
{
    SdpConfig cfg;
    cfg.lambda = get_double(settings, "lambda", 0.0);
    cfg.max_iter = get_int(settings, "max-iter", cfg.max_iter);
    cfg.tol = get_double(settings, "tol", cfg.tol);
    if (lookup(settings, "step"))
        cfg.step = get_double(settings, "step", 1.0);
    if (const std::string* b = lookup(settings, "backend")) {
        const auto backend = parse_sdp_backend(trim(*b));
        if (!backend)
            throw InvalidArgument("unknown sdp backend '" + *b + "'");
        cfg.backend = *backend;
    }
    return cfg;
}

CurveConfig curve_config_from(const Settings& settings)
{
    CurveConfig cfg;
    cfg.model = model_from(settings);
    cfg.p = get_int(settings, "p", cfg.p);
    if (lookup(settings, "s")) {
        cfg.sparsity_rule = SparsityRule::Explicit;
        cfg.explicit_s = get_int(settings, "s", 0);
    } else if (const std::string* rule = lookup(settings, "sparsity")) {
        const std::string_view r = trim(*rule);
        if (r == "sqrtp")
            cfg.sparsity_rule = SparsityRule::SqrtP;
        else if (r == "logp")
            cfg.sparsity_rule = SparsityRule::LogP;
        else
            throw InvalidArgument("unknown sparsity rule '" + *rule + "' (expected sqrtp or logp)");
    }
    if (const std::string* b = lookup(settings, "beta-scheme")) {
        const auto scheme = parse_beta_scheme(trim(*b));
        if (!scheme)
            throw InvalidArgument("unknown beta scheme '" + *b + "' (expected fixed or uniform)");
        cfg.beta_scheme = *scheme;
    }
    if (const std::string* m = lookup(settings, "method")) {
        const auto method = parse_method(trim(*m));
        if (!method)
            throw InvalidArgument("unknown method '" + *m + "' (expected dtsir or sdp)");
        cfg.method = *method;
    }
    if (const std::string* m = lookup(settings, "mode")) {
        const auto mode = parse_sir_mode(trim(*m));
        if (!mode)
            throw InvalidArgument("unknown mode '" + *m + "' (expected raw, centered or whitened)");
        cfg.estimator_mode = *mode;
    }
    cfg.h = get_int(settings, "H", cfg.h);
    if (const std::string* g = lookup(settings, "gamma-grid"))
        cfg.gamma_grid = parse_double_list(*g);
    cfg.reps = get_int(settings, "reps", cfg.reps);
    cfg.master_seed = static_cast<std::uint64_t>(get_long(settings, "seed", 0));
    if (lookup(settings, "lambda"))
        cfg.lambda = get_double(settings, "lambda", 0.0);
    cfg.sdp = sdp_config_from(settings);
    cfg.workers = get_int(settings, "workers", 1);
    return cfg;
}

void RunManifest::write(std::ostream& out) const
{
    out << "[run]\n";
    out << "version = " << version << '\n';
    out << "command = " << command << '\n';
    out << "config = " << config_path << '\n';
    out << "output_dir = " << output_dir.string() << '\n';
    out << "seed = " << seed << '\n';
    out << "generator = " << kGeneratorName << '\n';
    out << "\n[" << command << "]\n";
    for (const auto& [key, value] : effective)
        out << key << " = " << value << '\n';
    out << "\n[files]\n";
    for (std::size_t i = 0; i < files.size(); ++i)
        out << "file" << i + 1 << " = " << files[i] << '\n';
}

void write_text_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    out << content;
    out.flush();
    if (!out)
        throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace sdr
