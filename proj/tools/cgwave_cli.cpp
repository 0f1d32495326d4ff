#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cgwave/errors.hpp"
#include "cgwave/parallel.hpp"
#include "cgwave/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cgwave: generalized solutions of semilinear wave equations"};
  std::string command, config, out;
  std::optional<std::uint64_t> seed;
  app.add_option("command", command, "solve|valuation|singsupp|contraction|example3d|all")
      ->required()
      ->check(CLI::IsMember({"solve", "valuation", "singsupp", "contraction", "example3d", "all"}));
  app.add_option("--config", config, "JSON run configuration")->required();
  app.add_option("--out", out, "output directory")->required();
  app.add_option("--seed", seed, "seed for the contraction perturbations");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  cgw::RunConfig cfg;
  try {
    cfg = cgw::load_run_config(config);
  } catch (const cgw::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  cfg.command = cgw::parse_command(command);
  cfg.output_dir = out;
  if (seed) cfg.seed = *seed;

  std::clog << "[cgwave] " << command << " with " << cgw::thread_count() << " thread(s)\n";
  const cgw::RunOutcome r = cgw::run(cfg);
  if (r.status != 0) {
    std::cerr << (r.status == 2 ? "config error: " : "numerical failure: ") << r.message << "\n";
    return r.status;
  }
  std::cout << r.summary.dump(2) << "\n";
  std::cout << "manifest: " << (cfg.output_dir / "manifest.json").string() << " ("
            << r.manifest.files.size() << " files)\n";
  return 0;
}
