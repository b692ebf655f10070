#include "qcollapse/eigen_cache.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "qcollapse/io.hpp"

namespace qcollapse {

namespace {

constexpr std::array<char, 8> kMagic{'Q', 'C', 'E', 'I', 'G', 'S', 'Y', 'S'};

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
bool get(std::ifstream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof v));
}

}  // namespace

std::string EigenProblem::canonical() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "v%u;grid(%a,%a,%zu);mass=%a;n_kept=%zu;stencil=%s;", kEigenCacheVersion,
                grid.x_min(), grid.x_max(), grid.size(), mass, n_kept, to_string(stencil).c_str());
  return buf + describe(potential);
}

std::string EigenProblem::digest() const { return sha256_hex(canonical()); }

void save_eigensystem(const std::filesystem::path& file, const EigenProblem& problem, const EigenSystem& es) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write eigen cache " + file.string());
  out.write(kMagic.data(), kMagic.size());
  put(out, kEigenCacheVersion);
  put(out, std::uint32_t{0});
  const std::string key = problem.digest();
  out.write(key.data(), static_cast<std::streamsize>(key.size()));
  put(out, static_cast<std::uint64_t>(es.grid.size()));
  put(out, static_cast<std::uint64_t>(es.n_kept()));
  put(out, es.grid.x_min());
  put(out, es.grid.x_max());
  out.write(reinterpret_cast<const char*>(es.energies.data()),
            static_cast<std::streamsize>(sizeof(double) * es.energies.size()));
  out.write(reinterpret_cast<const char*>(es.states.data()),
            static_cast<std::streamsize>(sizeof(double) * es.states.size()));
}

std::optional<EigenSystem> load_eigensystem(const std::filesystem::path& file, const EigenProblem& problem) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::array<char, 8> magic{};
  std::uint32_t version = 0, reserved = 0;
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) return std::nullopt;
  if (!get(in, version) || version != kEigenCacheVersion || !get(in, reserved)) return std::nullopt;
  std::string key(64, '\0');
  if (!in.read(key.data(), 64) || key != problem.digest()) return std::nullopt;
  std::uint64_t n_points = 0, n_kept = 0;
  double x_min = 0, x_max = 0;
  if (!get(in, n_points) || !get(in, n_kept) || !get(in, x_min) || !get(in, x_max)) return std::nullopt;
  if (n_points != problem.grid.size() || n_kept != problem.n_kept) return std::nullopt;

  EigenSystem es{SpatialGrid(x_min, x_max, n_points), Eigen::VectorXd(static_cast<Eigen::Index>(n_kept)),
                 Eigen::MatrixXd(static_cast<Eigen::Index>(n_points), static_cast<Eigen::Index>(n_kept))};
  if (!(es.grid == problem.grid)) return std::nullopt;
  if (!in.read(reinterpret_cast<char*>(es.energies.data()),
               static_cast<std::streamsize>(sizeof(double) * es.energies.size())))
    return std::nullopt;
  if (!in.read(reinterpret_cast<char*>(es.states.data()),
               static_cast<std::streamsize>(sizeof(double) * es.states.size())))
    return std::nullopt;
  return es;
}

EigenSystem solve_eigenproblem(const EigenProblem& problem, const std::optional<std::filesystem::path>& cache_dir) {
  std::filesystem::path file;
  if (cache_dir) {
    file = *cache_dir / (problem.digest() + ".eig");
    if (auto cached = load_eigensystem(file, problem)) return std::move(*cached);
  }
  const auto h = discretize_hamiltonian(problem.potential, problem.grid, problem.mass, problem.stencil);
  EigenSystem es = eigensolve(h, problem.grid, problem.n_kept);
  if (cache_dir) {
    std::filesystem::create_directories(*cache_dir);
    // Write-then-rename so concurrent readers never see a partial file.
    auto tmp = file;
    tmp += ".tmp";
    save_eigensystem(tmp, problem, es);
    std::filesystem::rename(tmp, file);
  }
  return es;
}

}  // namespace qcollapse
