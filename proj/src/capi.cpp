#include "klab/klab.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "klab/errors.hpp"
#include "klab/runner.hpp"

struct klab_config {
  klab::RunConfig cfg;
};

struct klab_report {
  klab::VerificationReport rep;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

klab_status fail(klab_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs fn, translating exceptions into status codes.
template <class F>
klab_status guard(F&& fn) {
  try {
    g_last_error.clear();
    fn();
    return KLAB_OK;
  } catch (const klab::Error& e) {
    return fail(static_cast<klab_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::exception& e) {
    return fail(KLAB_E_INTERNAL, e.what());
  } catch (...) {
    return fail(KLAB_E_INTERNAL, "unknown exception");
  }
}

}  // namespace

extern "C" {

const char* klab_version(void) { return "1.0.0"; }

const char* klab_last_error(void) { return g_last_error.c_str(); }

const char* klab_status_name(klab_status s) {
  switch (s) {
    case KLAB_OK: return "Ok";
    case KLAB_E_NULL_ARGUMENT: return "NullArgument";
    case KLAB_E_INTERNAL: return "Internal";
    default:
      if (s >= KLAB_E_DIVISION_BY_ZERO_FUNCTION && s <= KLAB_E_IO)
        return klab::error_name(static_cast<klab::ErrorCode>(static_cast<int>(s)));
      return "Unknown";
  }
}

klab_status klab_config_parse(const char* json_text, klab_config** out) {
  if (!json_text || !out) return fail(KLAB_E_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] { *out = new klab_config{klab::parse_config(json_text)}; });
}

klab_status klab_config_echo(const klab_config* cfg, char** out) {
  if (!cfg || !out) return fail(KLAB_E_NULL_ARGUMENT, "null argument");
  return guard([&] { *out = dup_string(klab::config_to_json(cfg->cfg).dump(2)); });
}

const char* klab_config_output_path(const klab_config* cfg) { return cfg ? cfg->cfg.output_path.c_str() : ""; }

const char* klab_config_format(const klab_config* cfg) { return cfg ? cfg->cfg.format.c_str() : ""; }

int klab_config_is_table(const klab_config* cfg) { return cfg && cfg->cfg.command == klab::Command::Table; }

void klab_config_free(klab_config* cfg) { delete cfg; }

klab_status klab_run(const klab_config* cfg, klab_report** out) {
  if (!cfg || !out) return fail(KLAB_E_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] { *out = new klab_report{klab::run_suite(cfg->cfg)}; });
}

klab_status klab_report_parse(const char* json_text, klab_report** out) {
  if (!json_text || !out) return fail(KLAB_E_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] { *out = new klab_report{klab::parse_report_json(json_text)}; });
}

void klab_report_free(klab_report* rep) { delete rep; }

int klab_report_overall(const klab_report* rep) { return rep && rep->rep.overall(); }

size_t klab_report_size(const klab_report* rep) { return rep ? rep->rep.entries.size() : 0; }

klab_status klab_report_entry(const klab_report* rep, size_t index, klab_entry* out) {
  if (!rep || !out) return fail(KLAB_E_NULL_ARGUMENT, "null argument");
  if (index >= rep->rep.entries.size()) return fail(KLAB_E_INDEX_OUT_OF_RANGE, "entry index out of range");
  const klab::ReportEntry& e = rep->rep.entries[index];
  *out = klab_entry{e.tag.c_str(), e.paper_eq.c_str(), e.residual, e.tolerance, e.pass ? 1 : 0, e.note.c_str()};
  return KLAB_OK;
}

klab_status klab_report_render(const klab_report* rep, const klab_config* cfg, const char* format, char** out) {
  if (!rep || !cfg || !format || !out) return fail(KLAB_E_NULL_ARGUMENT, "null argument");
  return guard([&] { *out = dup_string(klab::render_report(rep->rep, cfg->cfg, format)); });
}

klab_status klab_report_write(const klab_report* rep, const klab_config* cfg, const char* format,
                              const char* path) {
  if (!rep || !cfg || !format || !path) return fail(KLAB_E_NULL_ARGUMENT, "null argument");
  return guard([&] { klab::write_text_file(path, klab::render_report(rep->rep, cfg->cfg, format)); });
}

klab_status klab_table_dump(const klab_config* cfg, char** csv, size_t* flagged) {
  if (!cfg || !csv) return fail(KLAB_E_NULL_ARGUMENT, "null argument");
  return guard([&] {
    const klab::RunConfig& c = cfg->cfg;
    if (!c.family) throw klab::Error(klab::ErrorCode::ConfigParse, "table needs a case block");
    const unsigned m = c.m_given ? c.m_lo : 2;
    klab::TableDump t = klab::table_dump(klab::case_params(*c.family, m), klab::parse_rational(c.grid_lo),
                                         klab::parse_rational(c.grid_hi), c.grid_n);
    *csv = dup_string(t.csv);
    if (flagged) *flagged = t.flagged;
  });
}

klab_status klab_write_file(const char* path, const char* text) {
  if (!path || !text) return fail(KLAB_E_NULL_ARGUMENT, "null argument");
  return guard([&] { klab::write_text_file(path, text); });
}

void klab_string_free(char* s) { std::free(s); }

}  // extern "C"
