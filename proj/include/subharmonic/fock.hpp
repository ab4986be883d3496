#pragma once

// Truncated two-mode Fock space, the k->l conversion Hamiltonian and its
// observables, and initial product states.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <complex>
#include <cstddef>
#include <variant>

namespace subharmonic {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

/// Unit-norm tolerance enforced when a StateVector is built from scratch.
inline constexpr double kStateNormTolerance = 1e-12;
/// Largest coherent-state tail weight accepted before renormalization.
inline constexpr double kCoherentTailLimit = 1e-10;

/// H = eps_a n_a + eps_b n_b + g (a^k b^dag^l + a^dag^k b^l), hbar = 1.
struct ModelParams {
  int k = 1;
  int l = 2;
  double g = 1.0;
  double eps_a = 0.0;
  double eps_b = 0.0;

  /// eps_a k - eps_b l.
  double detuning() const noexcept { return eps_a * k - eps_b * l; }

  /// Throws ValidationError unless k >= 1, l >= 1, g >= 0 and all values finite.
  void validate() const;
};

struct ModeTruncation {
  std::size_t n_a_max = 0;
  std::size_t n_b_max = 0;

  friend bool operator==(const ModeTruncation&, const ModeTruncation&) = default;
};

struct FockLevels {
  std::size_t n_a = 0;
  std::size_t n_b = 0;

  friend bool operator==(const FockLevels&, const FockLevels&) = default;
};

/// Row-major enumeration of the retained rectangle with n_b varying fastest:
/// index(n_a, n_b) = n_a (n_b_max + 1) + n_b.
class ProductBasis {
 public:
  /// Throws SizingError if the dimension is not addressable.
  explicit ProductBasis(ModeTruncation truncation);

  const ModeTruncation& truncation() const noexcept { return truncation_; }
  std::size_t dimension() const noexcept { return dimension_; }

  bool contains(std::size_t n_a, std::size_t n_b) const noexcept {
    return n_a <= truncation_.n_a_max && n_b <= truncation_.n_b_max;
  }
  std::size_t index(std::size_t n_a, std::size_t n_b) const noexcept {
    return n_a * (truncation_.n_b_max + 1) + n_b;
  }
  FockLevels levels(std::size_t index) const noexcept {
    return {index / (truncation_.n_b_max + 1), index % (truncation_.n_b_max + 1)};
  }

  friend bool operator==(const ProductBasis& a, const ProductBasis& b) noexcept {
    return a.truncation_ == b.truncation_;
  }

 private:
  ModeTruncation truncation_;
  std::size_t dimension_;
};

ProductBasis enumerate_basis(ModeTruncation truncation);

/// Amplitudes over a ProductBasis. Norm is checked against `norm_tolerance` on construction.
class StateVector {
 public:
  StateVector(ProductBasis basis, Eigen::VectorXcd amplitudes,
              double norm_tolerance = kStateNormTolerance);

  const ProductBasis& basis() const noexcept { return basis_; }
  const Eigen::VectorXcd& amplitudes() const noexcept { return amplitudes_; }
  Complex amplitude(std::size_t n_a, std::size_t n_b) const {
    return amplitudes_[static_cast<Eigen::Index>(basis_.index(n_a, n_b))];
  }
  double norm() const { return amplitudes_.norm(); }

 private:
  ProductBasis basis_;
  Eigen::VectorXcd amplitudes_;
};

class OperatorMatrix {
 public:
  /// `dropped_weight` is the sum of |element|^2 over ladder transitions that
  /// left the retained rectangle while the operator was built.
  OperatorMatrix(ProductBasis basis, SparseMatrix matrix, bool hermitian,
                 double dropped_weight = 0.0);

  const ProductBasis& basis() const noexcept { return basis_; }
  const SparseMatrix& matrix() const noexcept { return matrix_; }
  bool is_hermitian() const noexcept { return hermitian_; }
  double dropped_weight() const noexcept { return dropped_weight_; }

  /// max |M_ij - conj(M_ji)| over stored entries.
  double hermiticity_defect() const;

 private:
  ProductBasis basis_;
  SparseMatrix matrix_;
  bool hermitian_;
  double dropped_weight_;
};

OperatorMatrix build_hamiltonian(const ModelParams& params, const ProductBasis& basis);

struct Observables {
  OperatorMatrix n_a;
  OperatorMatrix n_b;
  OperatorMatrix x;  ///< (a^dag^k b^l + a^k b^dag^l) / 2
  OperatorMatrix y;  ///< (a^dag^k b^l - a^k b^dag^l) / 2i
  OperatorMatrix q;  ///< l n_a + k n_b, conserved by the interaction
};

Observables build_observables(const ModelParams& params, const ProductBasis& basis);

/// sqrt(n!/(n-m)!), the matrix element of a^m on |n>. Zero when m > n.
double lowering_factor(std::size_t n, std::size_t m);

/// Coherent-state amplitudes e^{-|alpha|^2/2} alpha^n / sqrt(n!) for n = 0..n_max,
/// renormalized. Throws TruncationError if n_max < |alpha|^2 + 6|alpha| or the
/// discarded tail weight is not below kCoherentTailLimit.
Eigen::VectorXcd coherent_state(Complex alpha, std::size_t n_max);

/// Poisson weight of the coherent-state levels above n_max.
double coherent_tail_weight(double mean_occupation, std::size_t n_max);

struct Coherent {
  Complex alpha;
};
struct Fock {
  std::size_t n = 0;
};

/// |psi(0)> = |mode_a> (x) |beta>_b.
struct InitialStateSpec {
  std::variant<Coherent, Fock> mode_a = Coherent{};
  Fock mode_b;

  /// |alpha|^2 for a coherent pump, n for a Fock pump.
  double mean_occupation_a() const;
};

StateVector product_initial_state(const InitialStateSpec& spec, const ProductBasis& basis);

/// Automatic truncation: n_a_max = ceil(N + 6 sqrt(N) + 10) for a coherent pump
/// (n + 10 for a Fock pump), extended until the coherent tail is negligible;
/// n_b_max = beta + ceil(l/k n_a_max), the largest n_b reachable at fixed charge.
ModeTruncation sizing_rule(const ModelParams& params, const InitialStateSpec& spec);

/// Norm of the part of H_int |psi> that falls outside the retained rectangle,
/// i.e. the amplitude flux carried by the dropped couplings.
double boundary_leakage(const ModelParams& params, const StateVector& state);

}  // namespace subharmonic
