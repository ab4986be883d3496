#pragma once

// Time evolution under a time-independent Hamiltonian and the observable
// traces recorded along the way.

#include "subharmonic/fock.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace subharmonic {

struct IntegratorOptions {
  /// Upper bound on the internal step; it is shortened further so that each
  /// Chebyshev expansion stays within a fixed span of the scaled spectrum.
  double step = std::numeric_limits<double>::infinity();
  /// Allowed norm error per unit time from series truncation.
  double tol = 1e-10;
  /// Integration fails once |norm - 1| exceeds this.
  double max_norm_drift = 1e-8;

  void validate() const;
};

struct ObservableRecord {
  double n_a = 0.0;
  double n_b = 0.0;
  double x = 0.0;
  double y = 0.0;
  double norm = 0.0;
  double q = 0.0;
  double energy = 0.0;  ///< <H>; not part of the CSV schema
};

struct ObservableTrace {
  std::vector<double> times;
  std::vector<ObservableRecord> records;

  std::size_t size() const noexcept { return times.size(); }
  std::vector<double> column(double ObservableRecord::*field) const;
};

/// `samples` points from 0 to t_end inclusive; t_end = 0 gives the single point {0}.
std::vector<double> uniform_grid(double t_end, std::size_t samples);

/// Spectral enclosure [lower, upper] of a Hermitian operator from Gershgorin discs.
struct SpectralBounds {
  double lower = 0.0;
  double upper = 0.0;
};
SpectralBounds gershgorin_bounds(const OperatorMatrix& hamiltonian);

/// Calls `visit(i, amplitudes)` with exp(-i H times[i]) psi0 for each output
/// time, in order. Times must be non-negative and strictly increasing.
/// Throws IntegrationError when the norm drifts past opts.max_norm_drift and
/// ValidationError on basis mismatch or a non-Hermitian H.
void propagate_each(const OperatorMatrix& hamiltonian, const StateVector& psi0,
                    std::span<const double> times, const IntegratorOptions& opts,
                    const std::function<void(std::size_t, const Eigen::VectorXcd&)>& visit);

std::vector<StateVector> propagate(const OperatorMatrix& hamiltonian, const StateVector& psi0,
                                   std::span<const double> times, const IntegratorOptions& opts = {});

/// <psi|O|psi>.
Complex expectation(const OperatorMatrix& op, const StateVector& psi);

/// Propagates and records n_a, n_b, x, y, norm, q and <H> at every time.
/// Fails with IntegrationError if the charge drifts by more than
/// max_norm_drift * |Q(0)|.
ObservableTrace observable_trace(const OperatorMatrix& hamiltonian, const StateVector& psi0,
                                 const Observables& ops, std::span<const double> times,
                                 const IntegratorOptions& opts = {});

/// Largest dimension accepted by the dense oracle.
inline constexpr std::size_t kDenseReferenceMaxDim = 512;

/// exp(-i H t) psi0 by full Hermitian eigendecomposition. Test oracle.
StateVector dense_reference_evolve(const OperatorMatrix& hamiltonian, const StateVector& psi0, double t);

}  // namespace subharmonic
