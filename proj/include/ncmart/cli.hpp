#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ncmart {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

// Campaign configuration.  The on-disk format is plain text, one "key =
// value" pair per line, # comments, with a mandatory "schema = 1" line;
// lists are comma separated.  Unknown keys are rejected so typos surface as
// usage errors instead of silently running defaults.
struct RunConfig {
  std::string suite = "identities";
  std::vector<double> p_list = {2.0};  // "inf" parses to infinity
  std::vector<int> tensor_factors = {2, 2, 2};
  int dyadic_depth = 3;
  int clifford_modes = 4;
  std::vector<double> grid_times = {0.0, 0.2, 0.45, 0.7, 1.0};
  std::vector<std::uint64_t> seeds = {1};
  int budget = 40;  // instances per campaign; k_max for the constants suite
  double tolerance = 1e-8;
  std::string out_path;  // empty writes nowhere (caller decides)
  std::string format = "csv";
};

// Parses the key-value text; throws std::invalid_argument naming the
// offending line or key.  load_config reads the file at path first.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

// Field-by-field bounds checks (suite name, module size limits, nonempty
// seeds, positive budget and tolerance); throws std::invalid_argument naming
// the field.
void validate_config(const RunConfig& cfg);

struct ReportRow {
  std::string suite;
  std::string inequality;
  double p = 0.0;
  std::uint64_t seed = 0;  // reproduces the worst instance of the campaign
  double residual_or_ratio = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct ReportMetadata {
  std::string version;
  int schema = kConfigSchemaVersion;
  std::string suite;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  std::string note;  // assumption flags, e.g. the symmetric constant doubling
};

struct Report {
  ReportMetadata metadata;
  std::vector<ReportRow> rows;
  bool all_pass() const;
};

// Executes the named suite (identities | stein | khintchine | bg | clifford |
// ito | duality | constants) and, when out_path is set, writes the report in
// the configured format.  Rows are deterministic functions of the config.
Report run_suite(const RunConfig& cfg);

// CSV body: header "suite,inequality,p,seed,residual_or_ratio,bound,pass",
// doubles printed with %.17g so identical runs are byte-identical.
std::string report_csv(const Report& r);

// JSON mirror of the CSV with a metadata envelope.  Doubles are carried as
// %.17g strings, which keeps infinities representable and the parse exact.
std::string report_json(const Report& r);

void emit_report(const Report& r, const std::string& format, std::ostream& out);
void emit_report_file(const Report& r, const std::string& format,
                      const std::string& path);

// Inverse of report_json; field-exact including doubles.
Report parse_report_json(std::istream& in);

// Command-line front end; returns the process exit code (0 all rows pass,
// 1 residual breach, 2 usage error).
int cli_main(int argc, const char* const* argv);

}  // namespace ncmart
