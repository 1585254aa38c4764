// Command-line front end. Links only the C interface.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cmc/cmc.h"

int main(int argc, char** argv) {
  CLI::App app{"Mean curvature solver and verifier"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cmc_version()));

  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  bool quiet = false;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"solve", "Solve at the configured t and check the planar properties"},
      {"homotopy", "Continuation over the t schedule with per-step critical counts"},
      {"axisym", "Meridian solve for a ball or spheroid and the revolution properties"},
      {"compare", "Nodal lab: difference against a cylinder or quadratic, or a harmonic field"},
      {"verify", "Full property suite, optionally on a stored solution"},
      {"mesh-report", "Mesh statistics only"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config,-c", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out,-o", out_dir, "Output directory (default: $OUT_DIR, then output.dir, then cmc_out)");
    sub->add_option("--override", overrides, "KEY=VALUE with a dotted key; VALUE is JSON or a bare string")
        ->take_all();
    sub->add_flag("--quiet,-q", quiet, "Do not print the report");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  std::ifstream in(config_path);
  std::stringstream buf;
  buf << in.rdbuf();
  if (!in) {
    std::cerr << "cmc: cannot read " << config_path << "\n";
    return 4;
  }
  if (out_dir.empty())
    if (const char* env = std::getenv("OUT_DIR"); env && *env) out_dir = env;

  std::vector<const char*> ov;
  for (const auto& o : overrides) ov.push_back(o.c_str());
  int exit_code = 0;
  char* report = nullptr;
  const cmc_status st = cmc_run(command.c_str(), buf.str().c_str(), out_dir.empty() ? nullptr : out_dir.c_str(),
                                ov.data(), ov.size(), &exit_code, &report);
  if (st != CMC_OK) {
    std::cerr << "cmc: " << cmc_status_name(st) << ": " << cmc_last_error() << "\n";
    return 4;
  }
  if (!quiet) std::fputs(report, stdout);
  cmc_string_free(report);
  return exit_code;
}
