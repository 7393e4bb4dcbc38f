// Command-line front end. Exit codes: 0 ok, 1 config error, 2 numerical error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "commbench/commbench.hpp"

namespace {

using commbench::ReportRow;
using commbench::ScenarioConfig;

ScenarioConfig load_config(const std::string& path, const std::string& id) {
  if (path.empty()) return commbench::default_config(id);
  std::ifstream is(path);
  if (!is) throw commbench::DomainError("cannot open config: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw commbench::DomainError("config " + path + ": " + e.what());
  }
  return commbench::config_from_json(j, id.empty() ? std::nullopt : std::optional<std::string>(id));
}

void write_rows(const std::vector<ReportRow>& rows, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << commbench::format_report(rows);
  else
    commbench::emit_report(rows, out);
}

int exit_code_for(const std::vector<ReportRow>& rows) {
  int code = 0;
  for (const auto& r : rows)
    if (r.quantity == "error") code = std::max(code, r.value >= 2.0 ? 2 : 1);
  return code;
}

struct StageOptions {
  std::string config;
  std::string id;
  std::string out;
};

void add_stage_options(CLI::App* sub, StageOptions& o) {
  sub->add_option("--config", o.config, "JSON config (ScenarioConfig keys)")->check(CLI::ExistingFile);
  sub->add_option("--id", o.id, "scenario whose defaults seed the config");
  sub->add_option("--out", o.out, "CSV output path (stdout if omitted)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"commbench: commutator lower bounds and norm probes"};
  app.require_subcommand(1);

  StageOptions norms_o, certify_o, osc_o, probe_o, scen_o;
  auto* norms = app.add_subcommand("norms", "norms of the symbol b in the configured spaces");
  add_stage_options(norms, norms_o);
  auto* certify = app.add_subcommand("certify", "shift search and pointwise certificate over the family");
  add_stage_options(certify, certify_o);
  auto* osc = app.add_subcommand("oscillation", "kernel oscillation along the admissible cone");
  add_stage_options(osc, osc_o);
  auto* probe = app.add_subcommand("probe", "operator norm probe of [b, T]");
  add_stage_options(probe, probe_o);
  auto* scen = app.add_subcommand("scenario", "run one scenario end to end");
  add_stage_options(scen, scen_o);
  scen->get_option("--id")->check(CLI::IsMember(commbench::scenario_ids()));

  std::string report_in;
  bool report_summary = false;
  auto* report = app.add_subcommand("report", "validate a CSV report and print it");
  report->add_option("--in", report_in, "CSV produced by another subcommand")->required()->check(CLI::ExistingFile);
  report->add_flag("--summary", report_summary, "print only row counts and error rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    auto stage = [](const StageOptions& o, auto fn) {
      const ScenarioConfig c = load_config(o.config, o.id.empty() && o.config.empty() ? "cor4_2" : o.id);
      commbench::check_relations(c);
      const auto rows = fn(c);
      write_rows(rows, o.out.empty() ? c.output : o.out);
      return exit_code_for(rows);
    };
    if (*norms) return stage(norms_o, commbench::run_norms);
    if (*certify) return stage(certify_o, commbench::run_certify);
    if (*osc) return stage(osc_o, commbench::run_oscillation);
    if (*probe) return stage(probe_o, commbench::run_probe);
    if (*scen) {
      if (scen_o.id.empty() && scen_o.config.empty()) throw commbench::DomainError("scenario needs --id or --config");
      const ScenarioConfig c = load_config(scen_o.config, scen_o.id);
      const auto res = commbench::run_scenario(c);
      write_rows(res.rows, scen_o.out.empty() ? c.output : scen_o.out);
      return res.numerical_errors > 0 ? 2 : (res.domain_errors > 0 ? 1 : 0);
    }
    if (*report) {
      const auto rows = commbench::read_report(report_in);
      if (report_summary) {
        std::cout << "rows " << rows.size() << "\n";
        for (const auto& r : rows)
          if (r.quantity == "error") std::cout << r.scenario << " " << r.item << ": " << r.notes << "\n";
      } else {
        std::cout << commbench::format_report(rows);
      }
      return exit_code_for(rows);
    }
  } catch (const commbench::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const commbench::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
