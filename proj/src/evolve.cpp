#include "subharmonic/evolve.hpp"

#include "subharmonic/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <optional>
#include <type_traits>
#include <sstream>

namespace subharmonic {

namespace {

// Largest b*dt handed to a single Chebyshev expansion, where b is the spectral
// half-width. Keeps Bessel evaluation well conditioned and the term count modest.
constexpr double kMaxScaledStep = 100.0;
// Series terms below this magnitude are never worth keeping.
constexpr double kCoefficientFloor = 1e-17;

void require_same_basis(const OperatorMatrix& op, const StateVector& psi) {
  if (!(op.basis() == psi.basis())) throw ValidationError("operator and state live on different bases");
}

// Compressed rows of H - center, with real values when H is real (always the
// case for the model Hamiltonian) so the recurrence does half the arithmetic.
template <typename Scalar>
struct ShiftedRows {
  std::vector<Eigen::Index> offsets;
  std::vector<Eigen::Index> columns;
  std::vector<Scalar> values;

  ShiftedRows(const SparseMatrix& h, double center) {
    const Eigen::Index rows = h.rows();
    offsets.reserve(static_cast<std::size_t>(rows) + 1);
    offsets.push_back(0);
    for (Eigen::Index r = 0; r < rows; ++r) {
      bool has_diagonal = false;
      for (SparseMatrix::InnerIterator it(h, r); it; ++it) {
        Complex v = it.value();
        if (it.col() == r) {
          v -= center;
          has_diagonal = true;
        }
        push(it.col(), v);
      }
      if (!has_diagonal) push(r, Complex(-center, 0.0));
      offsets.push_back(static_cast<Eigen::Index>(columns.size()));
    }
  }

  void push(Eigen::Index col, Complex v) {
    columns.push_back(col);
    if constexpr (std::is_same_v<Scalar, double>) {
      values.push_back(v.real());
    } else {
      values.push_back(v);
    }
  }
};

bool is_real(const SparseMatrix& h) {
  for (Eigen::Index k = 0; k < h.nonZeros(); ++k) {
    if (h.valuePtr()[k].imag() != 0.0) return false;
  }
  return true;
}

// exp(-i H dt) for a fixed dt as sum_n c_n T_n((H - center)/half_width).
template <typename Scalar>
class ChebyshevStep {
 public:
  ChebyshevStep(const ShiftedRows<Scalar>& rows, SpectralBounds bounds, double dt, double tol)
      : rows_(rows),
        half_width_(0.5 * (bounds.upper - bounds.lower)),
        phase_(std::polar(1.0, -0.5 * (bounds.upper + bounds.lower) * dt)) {
    if (half_width_ <= 0.0) return;
    const double x = half_width_ * dt;
    const double cutoff = std::max(kCoefficientFloor, 1e-3 * tol * dt);
    // J_n(x) decays faster than geometrically once n > x; stop after two
    // consecutive negligible terms past that point.
    const Complex minus_i(0.0, -1.0);
    Complex power(1.0, 0.0);
    for (int n = 0;; ++n) {
      const double j = std::cyl_bessel_j(static_cast<double>(n), x);
      coefficients_.push_back((n == 0 ? 1.0 : 2.0) * j * power);
      power *= minus_i;
      const std::size_t size = coefficients_.size();
      if (n > x && size >= 2 && std::abs(coefficients_[size - 1]) < cutoff &&
          std::abs(coefficients_[size - 2]) < cutoff) {
        break;
      }
    }
  }

  void apply(Eigen::VectorXcd& psi) {
    if (half_width_ <= 0.0) {
      psi *= phase_;
      return;
    }
    const Eigen::Index dim = psi.size();
    const double scale = 1.0 / half_width_;
    previous_ = psi;
    result_ = coefficients_[0] * previous_;
    if (coefficients_.size() > 1) {
      current_.resize(dim);
      const Complex c = coefficients_[1];
      for (Eigen::Index r = 0; r < dim; ++r) {
        const Complex v = scale * row_product(r, previous_);
        current_[r] = v;
        result_[r] += c * v;
      }
    }
    next_.resize(dim);
    const double twice = 2.0 * scale;
    for (std::size_t n = 2; n < coefficients_.size(); ++n) {
      const Complex c = coefficients_[n];
      for (Eigen::Index r = 0; r < dim; ++r) {
        const Complex v = twice * row_product(r, current_) - previous_[r];
        next_[r] = v;
        result_[r] += c * v;
      }
      std::swap(previous_, current_);
      std::swap(current_, next_);
    }
    psi = phase_ * result_;
  }

 private:
  Complex row_product(Eigen::Index r, const Eigen::VectorXcd& v) const {
    Complex sum(0.0, 0.0);
    const auto ur = static_cast<std::size_t>(r);
    for (auto k = static_cast<std::size_t>(rows_.offsets[ur]); k < static_cast<std::size_t>(rows_.offsets[ur + 1]); ++k) {
      sum += rows_.values[k] * v[rows_.columns[k]];
    }
    return sum;
  }

  const ShiftedRows<Scalar>& rows_;
  double half_width_;
  Complex phase_;
  std::vector<Complex> coefficients_;
  Eigen::VectorXcd previous_, current_, next_, result_;
};

template <typename Scalar>
void chebyshev_propagate(const SparseMatrix& h, SpectralBounds bounds, Eigen::VectorXcd& psi,
                         std::span<const double> times, const IntegratorOptions& opts,
                         const std::function<void(std::size_t, const Eigen::VectorXcd&)>& visit) {
  const double half_width = 0.5 * (bounds.upper - bounds.lower);
  const ShiftedRows<Scalar> rows(h, 0.5 * (bounds.upper + bounds.lower));
  double now = 0.0;
  // Uniform output grids differ only by rounding between intervals; those reuse one expansion.
  std::optional<ChebyshevStep<Scalar>> stepper;
  double stepper_dt = -1.0;

  for (std::size_t i = 0; i < times.size(); ++i) {
    const double interval = times[i] - now;
    if (interval > 0.0) {
      const double scaled_cap = half_width > 0.0 ? kMaxScaledStep / half_width : interval;
      const double max_dt = std::min(opts.step, scaled_cap);
      const auto substeps = static_cast<std::size_t>(std::max(1.0, std::ceil(interval / max_dt)));
      const double dt = interval / static_cast<double>(substeps);
      if (!stepper || std::abs(dt - stepper_dt) > 1e-14 * dt) {
        stepper.emplace(rows, bounds, dt, opts.tol);
        stepper_dt = dt;
      }
      for (std::size_t s = 0; s < substeps; ++s) stepper->apply(psi);
      now = times[i];
    }
    const double drift = std::abs(psi.norm() - 1.0);
    if (!(drift <= opts.max_norm_drift)) {
      std::ostringstream msg;
      msg << "norm drift " << drift << " at t = " << times[i] << " exceeds max_norm_drift "
          << opts.max_norm_drift;
      throw IntegrationError(msg.str());
    }
    visit(i, psi);
  }
}

}  // namespace

void IntegratorOptions::validate() const {
  if (!(step > 0.0)) throw ValidationError("integrator step must be > 0");
  if (!(tol > 0.0) || !std::isfinite(tol)) throw ValidationError("integrator tol must be > 0");
  if (!(max_norm_drift > 0.0)) throw ValidationError("integrator max_norm_drift must be > 0");
}

std::vector<double> ObservableTrace::column(double ObservableRecord::*field) const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.*field);
  return out;
}

std::vector<double> uniform_grid(double t_end, std::size_t samples) {
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end must be finite and >= 0");
  if (t_end == 0.0) return {0.0};
  if (samples < 2) throw ValidationError("a non-zero duration needs at least 2 samples");
  std::vector<double> grid(samples);
  const double denom = static_cast<double>(samples - 1);
  for (std::size_t i = 0; i < samples; ++i) grid[i] = t_end * (static_cast<double>(i) / denom);
  grid.back() = t_end;
  return grid;
}

SpectralBounds gershgorin_bounds(const OperatorMatrix& hamiltonian) {
  const auto& m = hamiltonian.matrix();
  SpectralBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    double center = 0.0;
    double radius = 0.0;
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      if (it.col() == r) {
        center = it.value().real();
      } else {
        radius += std::abs(it.value());
      }
    }
    b.lower = std::min(b.lower, center - radius);
    b.upper = std::max(b.upper, center + radius);
  }
  return b;
}

void propagate_each(const OperatorMatrix& hamiltonian, const StateVector& psi0,
                    std::span<const double> times, const IntegratorOptions& opts,
                    const std::function<void(std::size_t, const Eigen::VectorXcd&)>& visit) {
  opts.validate();
  require_same_basis(hamiltonian, psi0);
  if (!hamiltonian.is_hermitian()) throw ValidationError("propagation requires a Hermitian operator");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || !std::isfinite(times[i]) || (i > 0 && !(times[i] > times[i - 1]))) {
      throw ValidationError("output times must be finite, non-negative and strictly increasing");
    }
  }

  const auto bounds = gershgorin_bounds(hamiltonian);
  Eigen::VectorXcd psi = psi0.amplitudes();
  if (is_real(hamiltonian.matrix())) {
    chebyshev_propagate<double>(hamiltonian.matrix(), bounds, psi, times, opts, visit);
  } else {
    chebyshev_propagate<Complex>(hamiltonian.matrix(), bounds, psi, times, opts, visit);
  }
}

std::vector<StateVector> propagate(const OperatorMatrix& hamiltonian, const StateVector& psi0,
                                   std::span<const double> times, const IntegratorOptions& opts) {
  std::vector<StateVector> snapshots;
  snapshots.reserve(times.size());
  propagate_each(hamiltonian, psi0, times, opts, [&](std::size_t, const Eigen::VectorXcd& amps) {
    snapshots.emplace_back(psi0.basis(), amps, opts.max_norm_drift);
  });
  return snapshots;
}

Complex expectation(const OperatorMatrix& op, const StateVector& psi) {
  require_same_basis(op, psi);
  const Eigen::VectorXcd applied = op.matrix() * psi.amplitudes();
  return psi.amplitudes().dot(applied);
}

ObservableTrace observable_trace(const OperatorMatrix& hamiltonian, const StateVector& psi0,
                                 const Observables& ops, std::span<const double> times,
                                 const IntegratorOptions& opts) {
  for (const auto* op : {&ops.n_a, &ops.n_b, &ops.x, &ops.y, &ops.q}) require_same_basis(*op, psi0);
  ObservableTrace trace;
  trace.times.assign(times.begin(), times.end());
  trace.records.reserve(times.size());
  Eigen::VectorXcd scratch;
  const auto measure = [&](const OperatorMatrix& op, const Eigen::VectorXcd& amps) {
    scratch.noalias() = op.matrix() * amps;
    return amps.dot(scratch).real();
  };
  propagate_each(hamiltonian, psi0, times, opts, [&](std::size_t i, const Eigen::VectorXcd& amps) {
    ObservableRecord r;
    r.n_a = measure(ops.n_a, amps);
    r.n_b = measure(ops.n_b, amps);
    r.x = measure(ops.x, amps);
    r.y = measure(ops.y, amps);
    r.norm = amps.norm();
    r.q = measure(ops.q, amps);
    r.energy = measure(hamiltonian, amps);
    if (i > 0) {
      const double q0 = trace.records.front().q;
      const double drift = std::abs(r.q - q0);
      if (drift > opts.max_norm_drift * std::max(std::abs(q0), 1.0)) {
        std::ostringstream msg;
        msg << "conserved charge drifted by " << drift << " at t = " << times[i];
        throw IntegrationError(msg.str());
      }
    }
    trace.records.push_back(r);
  });
  return trace;
}

StateVector dense_reference_evolve(const OperatorMatrix& hamiltonian, const StateVector& psi0, double t) {
  require_same_basis(hamiltonian, psi0);
  const std::size_t dim = psi0.basis().dimension();
  if (dim > kDenseReferenceMaxDim) {
    throw ValidationError("dense reference evolution limited to dimension " +
                          std::to_string(kDenseReferenceMaxDim) + " (got " + std::to_string(dim) + ")");
  }
  if (t == 0.0) return psi0;
  const Eigen::MatrixXcd dense = Eigen::MatrixXcd(hamiltonian.matrix());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(dense);
  if (eig.info() != Eigen::Success) throw IntegrationError("dense eigendecomposition failed");
  const Eigen::VectorXcd coords = eig.eigenvectors().adjoint() * psi0.amplitudes();
  Eigen::VectorXcd phased(coords.size());
  for (Eigen::Index i = 0; i < coords.size(); ++i) {
    phased[i] = std::polar(1.0, -eig.eigenvalues()[i] * t) * coords[i];
  }
  return StateVector(psi0.basis(), eig.eigenvectors() * phased, 1e-10);
}

}  // namespace subharmonic
