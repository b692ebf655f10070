#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include "qcollapse/eigensolver.hpp"
#include "qcollapse/grid.hpp"

namespace qcollapse {

/// Everything that determines an EigenSystem.
struct EigenProblem {
  Potential potential;
  SpatialGrid grid;
  double mass = 1.0;
  std::size_t n_kept = 150;
  KineticStencil stencil = KineticStencil::FourthOrder;

  /// Canonical text (hex floats) hashed into the cache key.
  std::string canonical() const;
  std::string digest() const;
};

inline constexpr std::uint32_t kEigenCacheVersion = 1;

/// Binary cache file (little-endian host layout, see docs/formats.md):
///   8 bytes  magic "QCEIGSYS"
///   u32      format version
///   u32      reserved (0)
///   64 bytes key digest (ASCII hex)
///   u64      n_points, u64 n_kept
///   f64      x_min, x_max
///   f64[n_kept]            energies
///   f64[n_points*n_kept]   states, column-major
void save_eigensystem(const std::filesystem::path& file, const EigenProblem& problem, const EigenSystem& es);

/// Returns nullopt when the file is missing, has another version, or was
/// written for a different problem.
std::optional<EigenSystem> load_eigensystem(const std::filesystem::path& file, const EigenProblem& problem);

/// Solves the problem, consulting `cache_dir/<digest>.eig` first when a
/// directory is given.
EigenSystem solve_eigenproblem(const EigenProblem& problem,
                               const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

}  // namespace qcollapse
