#pragma once

// Batch driver: configuration, suites, report serialization.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "klab/bundlemetric.hpp"
#include "klab/report.hpp"
#include "klab/septuple.hpp"

namespace klab {

enum class Command { Identities, Septuple, Ode, Geometry, BB, All, Table };
const char* command_name(Command c);

// One family, rationals kept as text for the echo.
struct CaseBlock {
  std::string tag = "iii";  // i, ii, iii
  std::string K = "0", alpha = "0", eta = "0";
  std::string A = "0", B = "0", C = "0", c = "1";
  int eps = 1;
  std::string a = "1";
  std::optional<std::pair<std::string, std::string>> interval;
};

struct RunConfig {
  Command command = Command::All;
  unsigned m_lo = 1, m_hi = 8;
  bool m_given = false;
  std::optional<CaseBlock> family;
  std::map<std::string, double> tolerances;  // tag (or tag suffix) -> tolerance
  size_t sample_count = 20;
  uint64_t seed = 1;
  double fd_step = 1e-4;
  std::string output_path;
  std::string format = "json";
  size_t draws = 25;
  double ode_step = 1e-3;
  std::string bb_q = "1/2";
  std::optional<std::string> bb_eta;
  std::string grid_lo = "0", grid_hi = "1";
  size_t grid_n = 11;
};

// Throws Error(ConfigParse) on malformed or out-of-range input.
RunConfig parse_config(const std::string& json_text);
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);

CaseParams case_params(const CaseBlock& b, unsigned m);

VerificationReport run_identities(const RunConfig& cfg);
VerificationReport run_septuple(const RunConfig& cfg);
VerificationReport run_ode(const RunConfig& cfg);
VerificationReport run_geometry(const RunConfig& cfg);
VerificationReport run_bb(const RunConfig& cfg);
// Dispatches on cfg.command; `all` runs every suite. Tolerance overrides applied last.
VerificationReport run_suite(const RunConfig& cfg);
void apply_tolerances(VerificationReport& rep, const std::map<std::string, double>& tol);

std::string render_report(const VerificationReport& rep, const RunConfig& cfg, const std::string& format);
VerificationReport parse_report_json(const std::string& text);
void write_text_file(const std::string& path, const std::string& text);

struct TableDump {
  std::string csv;
  size_t rows = 0;
  size_t flagged = 0;
};
// Septuple values on an evenly spaced rational grid; pole rows are flagged.
TableDump table_dump(const CaseParams& p, const Rational& lo, const Rational& hi, size_t n);

}  // namespace klab
