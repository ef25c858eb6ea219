#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdr/experiments.hpp"

namespace sdr {

inline constexpr std::string_view kVersion = "sirsupp 0.1.0";

// ---------------------------------------------------------------------------
// Tables

/// Numeric table with one response column. Rows with empty / NA cells are
/// dropped and counted; any other unparsable cell is an error.
struct IngestedTable {
    std::vector<std::string> columns; // predictor names, header order
    std::string y_column;
    Matrix x;
    Vector y;
    int rows = 0;
    int rejected_rows = 0;

    Dataset as_dataset() const;
};

IngestedTable ingest_csv(const std::filesystem::path& path, std::string_view y_column);
IngestedTable parse_csv(std::istream& in, std::string_view y_column, std::string_view source = "<stream>");

/// Shortest decimal string that reads back to the same double.
std::string format_double(double value);

/// Header "y,x1,...,xp" (or the given names), full round-trip precision.
void write_dataset_csv(const Dataset& data, std::ostream& out,
                       const std::vector<std::string>& names = {});
void write_vector_csv(const Vector& v, std::string_view header, std::ostream& out);

/// Square numeric matrix without header.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const Matrix& m, std::ostream& out);

// ---------------------------------------------------------------------------
// Real-data ranking

enum class RecoveryMethod { Dt, Sdp };
std::optional<RecoveryMethod> parse_recovery_method(std::string_view text);

struct ReportRow {
    std::string name;
    int column = 0;
    double score = 0.0;
    int rank = 0; // 1-based among selected, 0 when not selected
    bool selected = false;
    int sign = 0;
};

struct RankedReport {
    RecoveryMethod method = RecoveryMethod::Dt;
    int s = 0;
    int h = 0;
    double lambda = 0.0;
    bool converged = true;
    std::vector<ReportRow> rows; // header order
};

/// Whitened SIR matrix, then DT (score V_jj, sign from DT-SIR) or SDP (score
/// |zhat_j|, top-s selected). Throws RankDeficient when n <= p.
RankedReport recover_real(const IngestedTable& table, int s, int h, RecoveryMethod method,
                          std::uint64_t seed, const SdpConfig& sdp = {},
                          std::optional<double> lambda = std::nullopt);

void write_report_csv(const RankedReport& report, std::ostream& out);

// ---------------------------------------------------------------------------
// Experiment output

inline constexpr std::string_view kCurveHeader =
    "model,p,s,method,mode,H,gamma,n,reps,successes,success_rate,skipped";

void write_curve_csv(const EfficiencyCurve& curve, std::ostream& out);
void emit_curve_csv(const EfficiencyCurve& curve, const std::filesystem::path& path);

void write_diagnostic_slices_csv(const StabilityDiagnostic& diag, std::string_view model, std::ostream& out);
void write_diagnostic_summary_csv(const StabilityDiagnostic& diag, std::string_view model, std::ostream& out);

// ---------------------------------------------------------------------------
// Configuration

/// Flat key/value settings of one command. Keys use the long flag names
/// without dashes, e.g. "gamma-grid".
using Settings = std::map<std::string, std::string>;

/// Reads the [command] section of an INI file. A missing section yields an
/// empty map.
Settings read_config_section(const std::filesystem::path& path, std::string_view command);

ModelSpec model_from(const Settings& settings);
SdpConfig sdp_config_from(const Settings& settings);
CurveConfig curve_config_from(const Settings& settings);
std::vector<double> parse_double_list(std::string_view text);
std::vector<int> parse_int_list(std::string_view text);

struct RunManifest {
    std::string command;
    std::string config_path;
    std::filesystem::path output_dir;
    std::uint64_t seed = 0;
    std::string version{kVersion};
    Settings effective;
    std::vector<std::string> files;

    void write(std::ostream& out) const;
};

/// Writes `content` to path, throwing IoError when the file cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace sdr
