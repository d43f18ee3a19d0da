#pragma once

#include <string>
#include <vector>

namespace klab {

class RatFunc;

struct ReportEntry {
  std::string tag;
  std::string paper_eq;  // the checked relation, written out
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::string note;  // diagnostics; "n/a: ..." for vacuous entries
};

struct VerificationReport {
  std::vector<ReportEntry> entries;

  bool overall() const;
  void add(ReportEntry e) { entries.push_back(std::move(e)); }
  // Exact entry: passes iff the residual function normalizes to zero.
  void add_exact(std::string tag, std::string eq, const RatFunc& residual);
  void add_numeric(std::string tag, std::string eq, double residual, double tol,
                   std::string note = {});
  void add_not_applicable(std::string tag, std::string eq, std::string why);
  void add_failure(std::string tag, std::string eq, std::string why);
  void append(const VerificationReport& other, const std::string& prefix = {});
  const ReportEntry* find(const std::string& tag) const;
  size_t failures() const;
};

// Per-tag worst case over sample reports, in first-appearance tag order.
// Each merged entry notes the sample index that produced its residual.
VerificationReport merge_worst(const std::vector<VerificationReport>& samples,
                               const std::string& sample_name = "point");

}  // namespace klab
