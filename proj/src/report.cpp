#include "klab/report.hpp"

#include <cmath>

#include "klab/exactalg.hpp"

namespace klab {

bool VerificationReport::overall() const {
  for (const auto& e : entries)
    if (!e.pass) return false;
  return true;
}

void VerificationReport::add_exact(std::string tag, std::string eq, const RatFunc& residual) {
  ReportEntry e;
  e.tag = std::move(tag);
  e.paper_eq = std::move(eq);
  e.residual = residual.magnitude();
  e.tolerance = 0.0;
  e.pass = residual.is_zero();
  if (!e.pass) e.note = "nonzero residual: " + residual.str();
  if (e.note.size() > 400) e.note = e.note.substr(0, 400) + "...";
  entries.push_back(std::move(e));
}

void VerificationReport::add_numeric(std::string tag, std::string eq, double residual, double tol,
                                     std::string note) {
  ReportEntry e;
  e.tag = std::move(tag);
  e.paper_eq = std::move(eq);
  e.residual = residual;
  e.tolerance = tol;
  e.pass = std::isfinite(residual) && residual <= tol;
  e.note = std::move(note);
  entries.push_back(std::move(e));
}

void VerificationReport::add_not_applicable(std::string tag, std::string eq, std::string why) {
  ReportEntry e;
  e.tag = std::move(tag);
  e.paper_eq = std::move(eq);
  e.pass = true;
  e.note = "n/a: " + why;
  entries.push_back(std::move(e));
}

void VerificationReport::add_failure(std::string tag, std::string eq, std::string why) {
  ReportEntry e;
  e.tag = std::move(tag);
  e.paper_eq = std::move(eq);
  e.residual = HUGE_VAL;
  e.pass = false;
  e.note = std::move(why);
  entries.push_back(std::move(e));
}

void VerificationReport::append(const VerificationReport& other, const std::string& prefix) {
  for (auto e : other.entries) {
    if (!prefix.empty()) e.tag = prefix + e.tag;
    entries.push_back(std::move(e));
  }
}

const ReportEntry* VerificationReport::find(const std::string& tag) const {
  for (const auto& e : entries)
    if (e.tag == tag) return &e;
  return nullptr;
}

size_t VerificationReport::failures() const {
  size_t n = 0;
  for (const auto& e : entries) n += e.pass ? 0 : 1;
  return n;
}

VerificationReport merge_worst(const std::vector<VerificationReport>& samples,
                               const std::string& sample_name) {
  VerificationReport out;
  std::vector<size_t> worst_at;
  for (size_t i = 0; i < samples.size(); ++i) {
    for (const auto& e : samples[i].entries) {
      size_t k = 0;
      while (k < out.entries.size() && out.entries[k].tag != e.tag) ++k;
      if (k == out.entries.size()) {
        out.entries.push_back(e);
        worst_at.push_back(i);
        continue;
      }
      ReportEntry& m = out.entries[k];
      const bool worse = (m.pass && !e.pass) ||
                         (m.pass == e.pass && !(std::fabs(e.residual) <= std::fabs(m.residual)));
      if (worse) {
        const bool pass = m.pass && e.pass;
        m = e;
        m.pass = pass;
        worst_at[k] = i;
      } else {
        m.pass = m.pass && e.pass;
      }
    }
  }
  for (size_t k = 0; k < out.entries.size(); ++k) {
    auto& e = out.entries[k];
    if (e.note.rfind("n/a", 0) == 0) continue;
    std::string where = "worst at " + sample_name + " " + std::to_string(worst_at[k]);
    e.note = e.note.empty() ? where : where + "; " + e.note;
  }
  return out;
}

}  // namespace klab
