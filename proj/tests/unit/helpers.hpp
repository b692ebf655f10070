#pragma once

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "qcollapse/eigen_cache.hpp"

namespace qcollapse::test {

inline std::optional<std::filesystem::path> cache_dir() {
  const char* env = std::getenv("QCOLLAPSE_EIGEN_CACHE");
  if (env && *env) return std::filesystem::path(env);
  return std::nullopt;
}

inline std::shared_ptr<const EigenSystem> basis(const Potential& p, double mass = 1.0, std::size_t n = 150) {
  EigenProblem problem{p, build_grid(-30.0, 30.0, 1501), mass, n, KineticStencil::FourthOrder};
  return std::make_shared<const EigenSystem>(solve_eigenproblem(problem, cache_dir()));
}

inline std::shared_ptr<const EigenSystem> soft_impact_basis() {
  static const auto b = basis(SoftImpact{1.0, 10.0, 5.0});
  return b;
}

inline std::shared_ptr<const EigenSystem> harmonic_basis(double k = 1.0, double c = 0.0, double m = 1.0) {
  return basis(Harmonic{k, c}, m);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("qcollapse_unit_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string cache_line() {
  const auto c = cache_dir();
  return c ? "eigen_cache_dir = " + c->string() + "\n" : std::string();
}

}  // namespace qcollapse::test
