#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "nvcav/kinetics.hpp"

namespace nvcav::testutil {

// Log-uniform sample in [lo, hi].
inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

// Random admissible rate set: every edge of the model active, rates spanning
// the given range. Evaluated at 1 mW green power and one intracavity photon
// so each coefficient maps one-to-one onto an edge rate.
inline RateCoefficients random_coefficients(std::mt19937_64& rng, double lo = 1e3,
                                            double hi = 1e9) {
  RateCoefficients c;
  c.internal.kf_minus = log_uniform(rng, lo, hi);
  c.internal.kf_0 = log_uniform(rng, lo, hi);
  c.internal.k23 = log_uniform(rng, lo, hi);
  c.internal.k34 = log_uniform(rng, lo, hi);
  c.internal.k41 = log_uniform(rng, lo, hi);
  c.internal.k56 = log_uniform(rng, lo, hi);
  c.internal.k75 = log_uniform(rng, lo, hi);
  c.green_per_mw.ke_minus = log_uniform(rng, lo, hi);
  c.green_per_mw.ke_0 = log_uniform(rng, lo, hi);
  c.green_per_mw.k25_1g = log_uniform(rng, lo, hi);
  c.green_per_mw.k51_1g = log_uniform(rng, lo, hi);
  c.green_per_mw.k74_1g = log_uniform(rng, lo, hi);
  c.ir_per_photon["x"] = {log_uniform(rng, lo, hi), log_uniform(rng, lo, hi)};
  return c;
}

inline DriveInstant unit_drive() { return DriveInstant{1.0, "x", 1.0}; }

// Long-time matrix-exponential propagation from the uniform distribution:
// the one-step transition matrix exp(G * t0) is squared repeatedly, doubling
// the horizon to t0 * 2^60. Every exact transition-matrix column is a
// probability distribution, so columns are renormalized after each squaring,
// which stops the otherwise-compounding column-sum drift of repeated
// squaring. Independent of the linear-solve route used by steady_state().
inline Populations longtime_populations(const RateCoefficients& coeffs,
                                        const DriveInstant& drive) {
  Propagator prop(coeffs, drive.green_power_mw, drive.ir_label);
  const Matrix7 gen = prop.generator(drive.n_ir);
  const double norm = gen.cwiseAbs().maxCoeff();

  const double t0 = 1e3 / norm;  // modest horizon: expm accurate here
  Matrix7 step = prop.exponential(drive.n_ir, t0);
  for (int k = 0; k < 60; ++k) {
    for (int c = 0; c < 7; ++c) step.col(c) /= step.col(c).sum();
    step = Matrix7(step * step);
  }
  Vector7 p = step * Vector7::Constant(1.0 / 7.0);
  p /= p.sum();
  return Populations::from_vector(p);
}

// Unique scratch directory under the system temp dir; removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("nvcav_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace nvcav::testutil
