// Command-line driver. Builds a JSON config from a file and/or flags and hands it
// to the C library. Exit codes: 0 all entries pass, 1 any failure (or I/O error),
// 2 usage or configuration error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "klab/klab.h"

using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string config_path;
  std::string m, case_tag, K, alpha, eta, A, B, C, c, eps, a, interval, grid, q;
  std::string format, output;
  std::vector<std::string> tols;
  long long points = -1, seed = -1, draws = -1;
  double h = 0.0, ode_step = 0.0;
};

json read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config file: ") + e.what());
  }
}

int parse_int(const std::string& s, const char* what) {
  size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw UsageError(std::string(what) + ": not an integer: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

json build_config(const std::string& command, const Flags& f) {
  json cfg = f.config_path.empty() ? json::object() : read_config_file(f.config_path);
  if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");
  if (!command.empty()) cfg["command"] = command;

  if (!f.m.empty()) {
    const auto dots = f.m.find("..");
    if (dots == std::string::npos) {
      const int m = parse_int(f.m, "--m");
      cfg["m_range"] = {m, m};
    } else {
      cfg["m_range"] = {parse_int(f.m.substr(0, dots), "--m"), parse_int(f.m.substr(dots + 2), "--m")};
    }
  }

  const bool is_bb = cfg.value("command", "") == "bb";
  json block = cfg.contains("case") ? cfg["case"] : json::object();
  auto put = [&](const char* key, const std::string& v) {
    if (!v.empty()) block[key] = v;
  };
  put("tag", f.case_tag);
  put("K", f.K);
  put("alpha", f.alpha);
  if (!is_bb) put("eta", f.eta);
  put("A", f.A);
  put("B", f.B);
  put("C", f.C);
  put("c", f.c);
  put("a", f.a);
  if (!f.eps.empty()) block["eps"] = parse_int(f.eps, "--eps");
  if (!f.interval.empty()) {
    auto parts = split(f.interval, ',');
    if (parts.size() != 2) throw UsageError("--interval expects lo,hi");
    block["interval"] = {parts[0], parts[1]};
  }
  if (!block.empty()) cfg["case"] = block;

  if (is_bb && (!f.eta.empty() || !f.q.empty())) {
    json bb = cfg.contains("bb") ? cfg["bb"] : json::object();
    if (!f.eta.empty()) bb["eta"] = f.eta;
    if (!f.q.empty()) bb["q"] = f.q;
    cfg["bb"] = bb;
  } else if (!f.q.empty()) {
    cfg["bb"]["q"] = f.q;
  }

  if (!f.grid.empty()) {
    auto parts = split(f.grid, ',');
    if (parts.size() != 3) throw UsageError("--grid expects lo,hi,n");
    cfg["grid"] = {{"lo", parts[0]}, {"hi", parts[1]}, {"n", parse_int(parts[2], "--grid")}};
  }
  for (const auto& t : f.tols) {
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--tol expects tag=value");
    try {
      cfg["tolerances"][t.substr(0, eq)] = std::stod(t.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("--tol: bad value in '" + t + "'");
    }
  }
  if (f.points >= 0) cfg["sample_count"] = f.points;
  if (f.seed >= 0) cfg["seed"] = f.seed;
  if (f.draws >= 0) cfg["draws"] = f.draws;
  if (f.h > 0.0) cfg["fd_step"] = f.h;
  if (f.ode_step > 0.0) cfg["ode_step"] = f.ode_step;
  if (!f.format.empty()) cfg["format"] = f.format;
  if (!f.output.empty()) cfg["output_path"] = f.output;
  return cfg;
}

int emit(const std::string& path, const char* text) {
  if (path.empty()) {
    std::fputs(text, stdout);
    return kExitPass;
  }
  if (klab_write_file(path.c_str(), text) != KLAB_OK) {
    std::fprintf(stderr, "klab: %s\n", klab_last_error());
    return kExitFail;
  }
  return kExitPass;
}

int run_config(const std::string& text) {
  klab_config* cfg = nullptr;
  if (klab_config_parse(text.c_str(), &cfg) != KLAB_OK) {
    std::fprintf(stderr, "klab: %s\n", klab_last_error());
    return kExitUsage;
  }
  const std::string path = klab_config_output_path(cfg);
  int code = kExitPass;

  if (klab_config_is_table(cfg)) {
    char* csv = nullptr;
    size_t flagged = 0;
    if (klab_table_dump(cfg, &csv, &flagged) != KLAB_OK) {
      std::fprintf(stderr, "klab: %s\n", klab_last_error());
      klab_config_free(cfg);
      return kExitFail;
    }
    code = emit(path, csv);
    klab_string_free(csv);
    if (flagged > 0) {
      std::fprintf(stderr, "klab: %zu grid point(s) hit a pole\n", flagged);
      code = kExitFail;
    }
    klab_config_free(cfg);
    return code;
  }

  klab_report* rep = nullptr;
  if (klab_run(cfg, &rep) != KLAB_OK) {
    std::fprintf(stderr, "klab: %s\n", klab_last_error());
    klab_config_free(cfg);
    return kExitUsage;
  }
  char* out = nullptr;
  if (klab_report_render(rep, cfg, klab_config_format(cfg), &out) != KLAB_OK) {
    std::fprintf(stderr, "klab: %s\n", klab_last_error());
    code = kExitFail;
  } else {
    code = emit(path, out);
    klab_string_free(out);
  }

  const size_t n = klab_report_size(rep);
  size_t failed = 0;
  for (size_t i = 0; i < n; ++i) {
    klab_entry e;
    if (klab_report_entry(rep, i, &e) == KLAB_OK && !e.pass) {
      ++failed;
      std::fprintf(stderr, "FAIL %s residual=%.3g tol=%.3g %s\n", e.tag, e.residual, e.tolerance, e.note);
    }
  }
  std::fprintf(stderr, "klab: %zu entries, %zu failed\n", n, failed);
  if (code == kExitPass && !klab_report_overall(rep)) code = kExitFail;
  klab_report_free(rep);
  klab_config_free(cfg);
  return code;
}

void add_shared_options(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config_path, "JSON config file; flags override its fields");
  app.add_option("--m", f.m, "complex dimension m or range lo..hi");
  app.add_option("--case", f.case_tag, "case tag: i, ii or iii")->check(CLI::IsMember({"i", "ii", "iii"}));
  app.add_option("--K", f.K, "case i/ii parameter K (rational)");
  app.add_option("--alpha", f.alpha, "case i/ii parameter alpha (rational)");
  app.add_option("--eta", f.eta, "case i/ii parameter eta; for bb, the Einstein constant eta");
  app.add_option("--A", f.A, "case iii parameter A");
  app.add_option("--B", f.B, "case iii parameter B");
  app.add_option("--C", f.C, "case iii parameter C");
  app.add_option("--c", f.c, "case iii parameter c");
  app.add_option("--eps", f.eps, "sign epsilon: -1, 0 or +1");
  app.add_option("--a", f.a, "fiber scale a (nonzero rational)");
  app.add_option("--interval", f.interval, "working tau interval lo,hi");
  app.add_option("--points", f.points, "sample points per configuration");
  app.add_option("--seed", f.seed, "random seed");
  app.add_option("--draws", f.draws, "random parameter draws per case");
  app.add_option("--fd-step", f.h, "finite-difference step");
  app.add_option("--ode-step", f.ode_step, "RK4 step");
  app.add_option("--q", f.q, "base complex dimension ratio q for bb");
  app.add_option("--grid", f.grid, "table grid lo,hi,n");
  app.add_option("--tol", f.tols, "tolerance override tag=value (repeatable)");
  app.add_option("--format", f.format, "report format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--output", f.output, "report path (default: stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification lab for conformally Einstein Kaehler metrics"};
  app.set_version_flag("--version", std::string(klab_version()));
  Flags flags;
  add_shared_options(app, flags);
  app.fallthrough();
  app.require_subcommand(0, 1);
  const char* commands[][2] = {
      {"identities", "exact special-function identities"},
      {"septuple", "septuple families, integrals and third-order equation"},
      {"ode", "RK4 cross-check against the closed forms"},
      {"geometry", "finite-difference certification of assembled metrics"},
      {"bb", "Berard Bergery family"},
      {"all", "every suite"},
      {"table", "septuple values on a grid (CSV)"},
  };
  for (const auto& c : commands) app.add_subcommand(c[0], c[1]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitUsage;
  }

  std::string command;
  for (const auto* sub : app.get_subcommands()) command = sub->get_name();
  if (command.empty() && flags.config_path.empty()) {
    std::cerr << app.help();
    return kExitUsage;
  }

  json cfg;
  try {
    cfg = build_config(command, flags);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "klab: %s\n", e.what());
    return kExitUsage;
  }
  return run_config(cfg.dump());
}
