// Acceptance run: one PASS/FAIL line per criterion. Residual bounds are pinned
// here, independently of the tolerances the library attaches to its entries.

#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "klab/runner.hpp"

using namespace klab;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class F>
VerificationReport timed(const F& fn, double& secs) {
  const auto t0 = std::chrono::steady_clock::now();
  VerificationReport r = fn();
  secs = seconds_since(t0);
  return r;
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

std::string leaf(const std::string& tag) { return tag.substr(tag.rfind('/') + 1); }

bool is_na(const ReportEntry& e) { return starts_with(e.note, "n/a"); }

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// Entries under `prefix`; fails the verdict if there are none.
std::vector<const ReportEntry*> select(const VerificationReport& r, const std::string& prefix, Verdict& v) {
  std::vector<const ReportEntry*> out;
  for (const auto& e : r.entries)
    if (starts_with(e.tag, prefix)) out.push_back(&e);
  if (out.empty()) v.fail("no entries under " + prefix);
  return out;
}

void require_pass(const std::vector<const ReportEntry*>& es, Verdict& v) {
  for (const auto* e : es)
    if (!e->pass) v.fail(e->tag + " failed (residual " + fmt("%.3g", e->residual) + ") " + e->note);
}

void require_exact(const std::vector<const ReportEntry*>& es, Verdict& v) {
  for (const auto* e : es) {
    if (is_na(*e)) continue;
    if (e->tolerance != 0.0 || e->residual != 0.0 || !e->pass) v.fail(e->tag + " is not an exact zero");
  }
}

// Residual bound for geometry entries; nullopt for entries without a pinned bound.
std::optional<double> geometry_bound(const std::string& tag, bool relaxed) {
  const std::string l = leaf(tag);
  auto pick = [&](double strict) { return relaxed ? 1e-4 : strict; };
  if (starts_with(l, "kahler.") || starts_with(l, "killing.")) return pick(1e-6);
  if (l == "eigen.Q" || l == "eigen.phi" || l == "eigen.psi" || l == "eigen.lambda" || l == "eigen.mu")
    return pick(1e-5);
  if (starts_with(l, "struct.")) return pick(1e-5);
  if (l == "einstein.trace_free") return pick(1e-5);
  if (l == "einstein.scal") return 1e-4;
  if (l == "fd.convergence_ratio") return 0.5;  // |ratio - 4| <= 0.5
  return std::nullopt;
}

void check_geometry_block(const VerificationReport& r, const std::string& prefix, bool relaxed, Verdict& v) {
  const auto es = select(r, prefix, v);
  require_pass(es, v);
  std::set<std::string> seen;
  for (const auto* e : es) {
    const auto bound = geometry_bound(e->tag, relaxed);
    if (!bound) continue;
    seen.insert(leaf(e->tag).substr(0, leaf(e->tag).find('.')));
    if (!(e->residual <= *bound)) v.fail(e->tag + " residual " + fmt("%.3g", e->residual) + " above " + fmt("%.0e", *bound));
  }
  for (const char* group : {"kahler", "killing", "eigen", "struct", "einstein", "fd"})
    if (!seen.count(group)) v.fail(prefix + " has no " + group + " entries");
}

void report(int id, const Verdict& v, const std::string& summary) {
  std::printf("criterion %d: %s  %s\n", id, v.pass ? "PASS" : "FAIL", v.pass ? summary.c_str() : v.detail.c_str());
}

}  // namespace

int main() {
  bool all = true;
  RunConfig base;
  base.seed = 1;
  base.sample_count = 20;

  // 1. Exact identity suite, m = 1..8.
  {
    Verdict v;
    RunConfig c = base;
    c.m_lo = 1, c.m_hi = 8, c.m_given = true;
    double secs = 0;
    const VerificationReport r = timed([&] { return run_identities(c); }, secs);
    const auto es = select(r, "identities/", v);
    require_pass(es, v);
    require_exact(es, v);
    for (unsigned m = 1; m <= 8; ++m)
      for (const char* t : {"su.F_first_order", "su.E_first_order", "su.second_order_E", "su.second_order_F",
                            "bb.P_against_E_F", "bb.F_phi", "bb.P_second_derivative"})
        if (!r.find("identities/m=" + std::to_string(m) + "/" + t)) v.fail(std::string("missing ") + t);
    for (unsigned m = 2; m <= 8; ++m)
      for (const char* t : {"su.rec_F", "su.rec_E", "su.rec_E0"}) {
        const ReportEntry* e = r.find("identities/m=" + std::to_string(m) + "/" + t);
        if (!e || is_na(*e)) v.fail(std::string("recursion not checked: ") + t);
      }
    if (secs > 10.0) v.fail("runtime " + fmt("%.2f", secs) + " s above 10 s");
    report(1, v, std::to_string(es.size()) + " exact entries, " + fmt("%.2f", secs) + " s");
    all &= v.pass;
  }

  // 2 and 3. Septuple families over random draws, third-order equation.
  VerificationReport sept;
  double sept_secs = 0;
  {
    RunConfig c = base;
    c.draws = 25;
    sept = timed([&] { return run_septuple(c); }, sept_secs);
  }
  {
    Verdict v;
    const auto es = select(sept, "septuple/", v);
    require_pass(es, v);
    require_exact(es, v);
    for (CaseTag tag : {CaseTag::I, CaseTag::II, CaseTag::III})
      for (unsigned m = 2; m <= 4; ++m) {
        const std::string p = std::string("septuple/") + case_name(tag) + "/m=" + std::to_string(m) + "/";
        for (const char* t : {"system.dQ", "system.dY", "system.dphi", "system.dpsi", "system.dlambda", "system.dmu",
                              "system.ds", "system.laplacian_trace", "system.scal_trace", "system.gap",
                              "system.conformal_a", "system.conformal_b", "integral.kappa", "integral.eta",
                              "integral.y_mark", "integral.s_mark"})
          if (!sept.find(p + t)) v.fail("missing " + p + t);
        const ReportEntry* d = sept.find(p + "system.dQ");
        if (d && d->note.find("draw") == std::string::npos) v.fail(p + " is not merged over draws");
      }
    if (sept_secs > 30.0) v.fail("runtime " + fmt("%.2f", sept_secs) + " s above 30 s");
    report(2, v, "25 draws x 3 cases x m=2..4, " + std::to_string(es.size()) + " merged exact entries, " +
                     fmt("%.2f", sept_secs) + " s");
    all &= v.pass;
  }
  {
    Verdict v;
    const auto es = select(sept, "third_order/", v);
    require_pass(es, v);
    require_exact(es, v);
    for (unsigned m = 2; m <= 6; ++m)
      for (const char* s : {"1", "E", "F"})
        if (!sept.find("third_order/m=" + std::to_string(m) + "/sigma=" + s + "/c=1/third_order.constant_value"))
          v.fail("missing sigma=" + std::string(s) + " at m=" + std::to_string(m));
    report(3, v, "sigma in {1, E, F}, m=2..6, constants m, 0, 0");
    all &= v.pass;
  }

  // 4. RK4 cross-check.
  {
    Verdict v;
    double secs = 0;
    const VerificationReport r = timed([&] { return run_ode(base); }, secs);
    const auto es = select(r, "ode/", v);
    require_pass(es, v);
    size_t measured = 0, families = 0;
    double worst_dev = 0, worst_drift = 0, lo = 1e300, hi = 0;
    for (const auto* e : es) {
      const std::string l = leaf(e->tag);
      if (is_na(*e)) continue;
      if (l == "ode.deviation") {
        ++families;
        worst_dev = std::max(worst_dev, e->residual);
        if (!(e->residual <= 1e-7)) v.fail(e->tag + " above 1e-7");
      } else if (l == "ode.drift") {
        worst_drift = std::max(worst_drift, e->residual);
        if (!(e->residual <= 1e-8)) v.fail(e->tag + " above 1e-8");
      } else if (l == "ode.order_ratio") {
        ++measured;
        lo = std::min(lo, e->residual), hi = std::max(hi, e->residual);
        if (!(e->residual >= 12.0 && e->residual <= 20.0)) v.fail(e->tag + " outside [12, 20]");
      }
    }
    if (families < 5) v.fail("fewer than five families integrated");
    if (measured < 3) v.fail("order ratio measured on fewer than three families");
    if (secs > 10.0) v.fail("runtime above 10 s");
    report(4, v, std::to_string(families) + " families, deviation <= " + fmt("%.2g", worst_dev) + ", drift <= " +
                     fmt("%.2g", worst_drift) + ", ratios in [" + fmt("%.2f", lo) + ", " + fmt("%.2f", hi) + "], " +
                     fmt("%.2f", secs) + " s");
    all &= v.pass;
  }

  // 5 to 8 share one geometry run.
  double geo_secs = 0;
  const VerificationReport geo = timed([&] { return run_geometry(base); }, geo_secs);
  {
    Verdict v;
    for (const char* cfg : {"I.eps0", "II.eps+1", "II.eps-1", "III.eps+1", "III.eps-1"})
      check_geometry_block(geo, std::string("geometry/") + cfg + "/m=2/", false, v);
    if (geo_secs > 60.0) v.fail("runtime above 60 s");
    report(5, v, "cases I, II+/-, III+/- at 20 points, " + fmt("%.2f", geo_secs) + " s for the geometry suite");
    all &= v.pass;
  }
  {
    Verdict v;
    check_geometry_block(geo, "geometry/III.fubini-study/m=3/", true, v);
    report(6, v, "m=3 over a Fubini-Study base at relaxed tolerance 1e-4");
    all &= v.pass;
  }
  {
    Verdict v;
    std::string summary;
    for (const char* t : {"geometry/control.kappa_plus_one", "geometry/control.connection_scale"}) {
      const ReportEntry* e = geo.find(t);
      if (!e) {
        v.fail(std::string("missing ") + t);
        continue;
      }
      if (!(e->residual > 1e-2)) v.fail(std::string(t) + " residual " + fmt("%.3g", e->residual) + " not above 1e-2");
      summary += leaf(t) + " " + fmt("%.3g", e->residual) + "  ";
    }
    report(7, v, summary);
    all &= v.pass;
  }
  {
    Verdict v;
    const auto es = select(geo, "geometry/product/m=2/", v);
    require_pass(es, v);
    for (const auto* e : es) {
      const std::string l = leaf(e->tag);
      const double bound = l == "product.Q_plus_K_tau2" ? 1e-8 : 1e-5;
      if (!(e->residual <= bound)) v.fail(e->tag + " above " + fmt("%.0e", bound));
    }
    for (const char* t : {"product.hessian", "product.laplacian", "product.b_tensor", "product.Q_plus_K_tau2"})
      if (!geo.find(std::string("geometry/product/m=2/") + t)) v.fail(std::string("missing ") + t);
    report(8, v, "Hessian, Laplacian, b-tensor and Q + K tau^2");
    all &= v.pass;
  }

  // 9. Berard Bergery family.
  {
    Verdict v;
    const VerificationReport r = run_bb(base);
    for (unsigned m = 2; m <= 6; ++m) {
      const std::string p = "bb/m=" + std::to_string(m) + "/";
      for (const char* t : {"bb.Q_identity", "bb.kappa", "bb.positivity"}) {
        const ReportEntry* e = r.find(p + t);
        if (!e || !e->pass) v.fail(p + t + (e ? " failed" : " missing"));
      }
      const ReportEntry* id = r.find(p + "bb.Q_identity");
      if (id && (id->tolerance != 0.0 || id->residual != 0.0)) v.fail(p + "bb.Q_identity not exact");
    }
    check_geometry_block(r, "bb/m=2/geometry/", false, v);
    report(9, v, "identity exact for m=2..6, m=2 chart certified, positivity on all samples");
    all &= v.pass;
  }

  std::printf("acceptance: %s\n", all ? "PASS" : "FAIL");
  return all ? 0 : 1;
}
