// qcollapse command line: simulate, reproduce, eigen, curves.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "qcollapse/config.hpp"
#include "qcollapse/reproduce.hpp"
#include "qcollapse/runner.hpp"

namespace fs = std::filesystem;
using namespace qcollapse;

namespace {

int fail(const std::string& kind, const std::string& message, const std::string& key = {}) {
  nlohmann::json err{{"error", kind}, {"message", message}};
  if (!key.empty()) err["key"] = key;
  std::cerr << err.dump() << "\n";
  return kind == "config" ? 2 : 1;
}

void report(const fs::path& dir, const RunManifest& m) {
  nlohmann::json out{{"output_dir", dir.string()}, {"config_hash", m.config_hash}, {"files", m.checksums.size()}};
  std::cout << out.dump() << "\n";
}

// --out wins; otherwise the config's output_dir (relative to the output
// root) with `suffix` for the auxiliary subcommands.
fs::path target_dir(const RunConfig& cfg, const std::string& out, const std::string& suffix) {
  if (!out.empty()) return out;
  fs::path dir = resolve_output_dir(cfg);
  if (!suffix.empty()) dir += "-" + suffix;
  return dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum soft-impact oscillator with interaction-induced collapse"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path, out, id;
  std::size_t threads = 0;
  bool threads_set = false;

  auto* simulate = app.add_subcommand("simulate", "Run the scenario described by a config file");
  simulate->add_option("config", config_path, "INI config file")->required();
  simulate->add_option("--out", out, "Output directory (overrides run.output_dir)");
  simulate->add_option("--threads", threads, "Ensemble worker threads (0: all cores)")
      ->each([&](const std::string&) { threads_set = true; });

  ReproduceOptions ropts;
  if (const char* cache = std::getenv("QCOLLAPSE_EIGEN_CACHE")) ropts.eigen_cache_dir = cache;
  auto* repro = app.add_subcommand("reproduce", "Regenerate the data behind a table or figure");
  repro->add_option("id", id, "Bundle id")->required()->check(CLI::IsMember(reproduce_ids()));
  repro->add_option("--out", out, "Output directory (default <output root>/reproduce/<id>)");
  repro->add_option("--ensemble", ropts.ensemble_size, "Members per stochastic ensemble")->capture_default_str();
  repro->add_option("--two-particle-steps", ropts.two_particle_steps, "Steps per two-particle ensemble member")
      ->capture_default_str();
  repro->add_option("--seed", ropts.seed, "Base seed")->capture_default_str();
  repro->add_option("--threads", ropts.threads, "Ensemble worker threads (0: all cores)");
  repro->add_option("--eigen-cache", ropts.eigen_cache_dir, "Eigenbasis cache directory");

  auto* eigen = app.add_subcommand("eigen", "Dump the eigenvalue staircase of the configured potential");
  eigen->add_option("config", config_path, "INI config file")->required();
  eigen->add_option("--out", out, "Output directory");

  auto* curves = app.add_subcommand("curves", "Dump constant-energy curves of Gaussian states");
  curves->add_option("config", config_path, "INI config file")->required();
  curves->add_option("--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*repro) {
      const fs::path dir = out.empty() ? output_root() / "reproduce" / id : fs::path(out);
      reproduce(id, dir, ropts);
      std::cout << nlohmann::json{{"output_dir", dir.string()}, {"id", id}}.dump() << "\n";
      return 0;
    }
    RunConfig cfg = load_config(config_path);
    if (*simulate) {
      if (threads_set) cfg.threads = threads;
      const fs::path dir = target_dir(cfg, out, "");
      report(dir, run(cfg, dir));
    } else if (*eigen) {
      const fs::path dir = target_dir(cfg, out, "eigen");
      report(dir, write_eigen_dump(cfg, dir));
    } else {
      const fs::path dir = target_dir(cfg, out, "curves");
      report(dir, write_curves(cfg, dir));
    }
    return 0;
  } catch (const ConfigError& e) {
    return fail("config", e.what(), e.key());
  } catch (const std::exception& e) {
    return fail("runtime", e.what());
  }
}
