#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "qcollapse/config.hpp"

namespace qcollapse {

struct ReproduceOptions {
  std::size_t ensemble_size = 100;
  /// Steps per two-particle ensemble member.
  std::size_t two_particle_steps = 2000;
  std::size_t threads = 0;
  std::uint64_t seed = 20240101;
  std::string eigen_cache_dir;
};

/// Published reference numbers.
struct PublishedRow {
  std::string label;
  double energy;
  double mean;
  double sd;
};
const std::vector<PublishedRow>& published_wall_rows();  // no collapse, postulates 1-4

const std::vector<std::string>& reproduce_ids();

/// INI text of the pinned configuration behind one bundle part, e.g.
/// pinned_config("postulate2", opts).
std::string pinned_config(const std::string& variant, const ReproduceOptions& opts);

/// Runs the pinned configuration(s) for `id` into out_dir, writes the data
/// files, summary.json (computed vs published values) and a manifest per
/// run directory. Returns the summary. Throws std::invalid_argument for an
/// unknown id.
nlohmann::json reproduce(const std::string& id, const std::filesystem::path& out_dir, const ReproduceOptions& opts);

}  // namespace qcollapse
