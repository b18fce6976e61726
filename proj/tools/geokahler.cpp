#include <chrono>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "geokahler/cli.hpp"

using namespace geokahler;

int main(int argc, char** argv) {
  CLI::App app{"Kahler metrics induced by Lorentzian metrics: verification, region scans and curvature reports"};
  app.require_subcommand(1);

  cli::RunConfig cfg;
  cfg.tol = cli::default_tolerance();
  std::vector<std::string> params, boxes;
  std::optional<int> orientation;
  std::optional<std::string> f;
  std::string entry_pos, spec_pos;

  auto add_common = [&](CLI::App* sub, bool needs_entry) {
    if (needs_entry) {
      sub->add_option("id", entry_pos, "catalog entry id");
      sub->add_option("--entry", cfg.entry, "catalog entry id");
      sub->add_option("--param", params, "parameter override name=value (repeatable)");
    } else {
      sub->add_option("spec", spec_pos, "spec file")->required();
      sub->add_option("--param", params, "parameter override name=value (repeatable)");
    }
    sub->add_option("--box", boxes, "sample box override coord=lo:hi (repeatable)");
    sub->add_option("--samples", cfg.samples, "number of Halton samples")->capture_default_str();
    sub->add_option("--tol", cfg.tol, "jet tolerance (default: GEOKAHLER_TOL or 1e-7)");
    sub->add_option("--fd-tol", cfg.fd_tol, "finite-difference oracle tolerance")->capture_default_str();
    sub->add_option("--orientation", orientation, "orientation of (V, x, y): 1 or -1");
    sub->add_option("--f", f, "parameter function: affine:c | exp | expr:<tau expression>");
    sub->add_option("--format", cfg.format, "json | csv | text")->capture_default_str();
    sub->add_option("--out", cfg.out, "write the report to a file instead of stdout");
    sub->add_option("--check", cfg.checks, "keep only checks whose name starts with this (repeatable)");
  };

  CLI::App* list = app.add_subcommand("list", "list catalog entries");
  list->add_option("--format", cfg.format, "json | csv | text")->capture_default_str();
  list->add_option("--out", cfg.out, "output file");
  CLI::App* verify = app.add_subcommand("verify", "run the verification suite on an entry");
  add_common(verify, true);
  CLI::App* region = app.add_subcommand("region", "scan the Kahler region inequalities");
  add_common(region, true);
  CLI::App* curv = app.add_subcommand("curvature", "compare curvature formulas with the oracle");
  add_common(curv, true);
  curv->add_option("--case", cfg.curvature_case, "auto | geodesic | killing")->capture_default_str();
  CLI::App* custom = app.add_subcommand("custom", "run the verification suite on a spec file");
  add_common(custom, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfig;
  }

  const auto t0 = std::chrono::steady_clock::now();
  cli::Outcome res;
  try {
    for (CLI::App* sub : {list, verify, region, curv, custom})
      if (sub->parsed()) cfg.command = sub->get_name();
    if (!entry_pos.empty()) {
      if (!cfg.entry.empty() && cfg.entry != entry_pos) throw ConfigError("entry given twice");
      cfg.entry = entry_pos;
    }
    cfg.spec_path = spec_pos;
    for (const auto& p : params) cfg.params.insert(cli::parse_param(p));
    for (const auto& b : boxes) cfg.box.push_back(cli::parse_box(b));
    cfg.orientation = orientation;
    cfg.f = f;
    if (cfg.command != "list" && cfg.command != "custom" && cfg.entry.empty())
      throw ConfigError("missing entry id (see 'geokahler list')");
    res = cli::run(cfg);
  } catch (const ConfigError& e) {
    res.exit_code = cli::kConfig;
    res.error = e.what();
  }

  if (!res.output.empty()) {
    if (cfg.out.empty()) {
      std::cout << res.output;
    } else {
      std::ofstream o(cfg.out);
      if (!o) {
        std::cerr << "error: cannot write '" << cfg.out << "'\n";
        return cli::kConfig;
      }
      o << res.output;
    }
  }
  if (!res.error.empty()) std::cerr << (res.exit_code == cli::kConfig ? "error: " : "") << res.error << "\n";
  if (cfg.format == "text" && cfg.command != "list") {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "elapsed " << secs << " s\n";
  }
  return res.exit_code;
}
