#include "subharmonic/fock.hpp"

#include "subharmonic/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace subharmonic {

namespace {

using Triplet = Eigen::Triplet<Complex>;

// Visits every retained state that the a^k b^dag^l term maps to another
// retained state. `fn(source, target, factor)` receives the ladder factor
// sqrt(n_a!/(n_a-k)!) sqrt((n_b+l)!/n_b!).
template <typename Fn>
void for_each_down_conversion(const ModelParams& params, const ProductBasis& basis, Fn&& fn) {
  const auto k = static_cast<std::size_t>(params.k);
  const auto l = static_cast<std::size_t>(params.l);
  const auto& trunc = basis.truncation();
  for (std::size_t n_a = k; n_a <= trunc.n_a_max; ++n_a) {
    for (std::size_t n_b = 0; n_b + l <= trunc.n_b_max; ++n_b) {
      const double factor = lowering_factor(n_a, k) * lowering_factor(n_b + l, l);
      fn(basis.index(n_a, n_b), basis.index(n_a - k, n_b + l), factor);
    }
  }
}

// Sum of squared ladder factors of transitions leaving the rectangle, in
// either direction of the interaction.
double dropped_ladder_weight(const ModelParams& params, const ProductBasis& basis) {
  const auto k = static_cast<std::size_t>(params.k);
  const auto l = static_cast<std::size_t>(params.l);
  const auto& trunc = basis.truncation();
  double weight = 0.0;
  for (std::size_t n_a = 0; n_a <= trunc.n_a_max; ++n_a) {
    for (std::size_t n_b = 0; n_b <= trunc.n_b_max; ++n_b) {
      if (n_a >= k && n_b + l > trunc.n_b_max) {
        const double f = lowering_factor(n_a, k) * lowering_factor(n_b + l, l);
        weight += f * f;
      }
      if (n_b >= l && n_a + k > trunc.n_a_max) {
        const double f = lowering_factor(n_a + k, k) * lowering_factor(n_b, l);
        weight += f * f;
      }
    }
  }
  return weight;
}

void append_diagonal(const ProductBasis& basis, double weight_a, double weight_b,
                     std::vector<Triplet>& entries) {
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const auto lv = basis.levels(i);
    const double value = weight_a * static_cast<double>(lv.n_a) + weight_b * static_cast<double>(lv.n_b);
    if (value != 0.0) {
      const auto idx = static_cast<Eigen::Index>(i);
      entries.emplace_back(idx, idx, value);
    }
  }
}

SparseMatrix assemble(const ProductBasis& basis, const std::vector<Triplet>& entries) {
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  SparseMatrix m(dim, dim);
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

SparseMatrix diagonal_matrix(const ProductBasis& basis, double weight_a, double weight_b) {
  std::vector<Triplet> entries;
  entries.reserve(basis.dimension());
  append_diagonal(basis, weight_a, weight_b, entries);
  return assemble(basis, entries);
}

// Diagonal plus interaction: forward_scale * ladder factor goes to (target, source) for
// a^k b^dag^l, its conjugate goes to (source, target).
SparseMatrix interaction_matrix(const ModelParams& params, const ProductBasis& basis,
                                Complex forward_scale, double weight_a, double weight_b) {
  std::vector<Triplet> entries;
  append_diagonal(basis, weight_a, weight_b, entries);
  if (forward_scale == Complex(0.0, 0.0)) return assemble(basis, entries);
  for_each_down_conversion(params, basis, [&](std::size_t source, std::size_t target, double factor) {
    const Complex element = forward_scale * factor;
    entries.emplace_back(static_cast<Eigen::Index>(target), static_cast<Eigen::Index>(source), element);
    entries.emplace_back(static_cast<Eigen::Index>(source), static_cast<Eigen::Index>(target),
                         std::conj(element));
  });
  return assemble(basis, entries);
}

}  // namespace

void ModelParams::validate() const {
  std::ostringstream why;
  if (k < 1) why << "k must be >= 1 (got " << k << "); ";
  if (l < 1) why << "l must be >= 1 (got " << l << "); ";
  if (!std::isfinite(g) || g < 0.0) why << "g must be finite and >= 0 (got " << g << "); ";
  if (!std::isfinite(eps_a) || !std::isfinite(eps_b)) why << "mode energies must be finite; ";
  if (const auto msg = why.str(); !msg.empty()) {
    throw ValidationError("invalid model parameters: " + msg.substr(0, msg.size() - 2));
  }
}

ProductBasis::ProductBasis(ModeTruncation truncation) : truncation_(truncation), dimension_(0) {
  constexpr auto limit = static_cast<std::size_t>(std::numeric_limits<Eigen::Index>::max());
  const std::size_t rows = truncation.n_a_max + 1;
  const std::size_t cols = truncation.n_b_max + 1;
  if (rows == 0 || cols == 0 || rows > limit / cols) {
    throw SizingError("product basis dimension overflows the addressable size");
  }
  dimension_ = rows * cols;
}

ProductBasis enumerate_basis(ModeTruncation truncation) { return ProductBasis(truncation); }

StateVector::StateVector(ProductBasis basis, Eigen::VectorXcd amplitudes, double norm_tolerance)
    : basis_(basis), amplitudes_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amplitudes_.size()) != basis_.dimension()) {
    throw ValidationError("state vector length does not match the basis dimension");
  }
  const double drift = std::abs(amplitudes_.norm() - 1.0);
  if (!(drift <= norm_tolerance)) {
    std::ostringstream msg;
    msg << "state vector is not normalized: |norm - 1| = " << drift;
    throw ValidationError(msg.str());
  }
}

OperatorMatrix::OperatorMatrix(ProductBasis basis, SparseMatrix matrix, bool hermitian,
                               double dropped_weight)
    : basis_(basis), matrix_(std::move(matrix)), hermitian_(hermitian), dropped_weight_(dropped_weight) {
  const auto dim = static_cast<Eigen::Index>(basis_.dimension());
  if (matrix_.rows() != dim || matrix_.cols() != dim) {
    throw ValidationError("operator shape does not match the basis dimension");
  }
  matrix_.makeCompressed();
}

double OperatorMatrix::hermiticity_defect() const {
  const SparseMatrix adjoint = matrix_.adjoint();
  const SparseMatrix diff = matrix_ - adjoint;
  double worst = 0.0;
  for (Eigen::Index r = 0; r < diff.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(diff, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

double lowering_factor(std::size_t n, std::size_t m) {
  if (m > n) return 0.0;
  double product = 1.0;
  for (std::size_t j = n - m + 1; j <= n; ++j) product *= static_cast<double>(j);
  return std::sqrt(product);
}

OperatorMatrix build_hamiltonian(const ModelParams& params, const ProductBasis& basis) {
  params.validate();
  auto matrix = interaction_matrix(params, basis, Complex(params.g, 0.0), params.eps_a, params.eps_b);
  const double dropped = params.g * params.g * dropped_ladder_weight(params, basis);
  return OperatorMatrix(basis, std::move(matrix), true, dropped);
}

Observables build_observables(const ModelParams& params, const ProductBasis& basis) {
  params.validate();
  const double dropped = dropped_ladder_weight(params, basis) / 4.0;
  // y = (a^dag^k b^l - a^k b^dag^l)/(2i): the a^k b^dag^l part carries -1/(2i) = i/2.
  return Observables{
      OperatorMatrix(basis, diagonal_matrix(basis, 1.0, 0.0), true),
      OperatorMatrix(basis, diagonal_matrix(basis, 0.0, 1.0), true),
      OperatorMatrix(basis, interaction_matrix(params, basis, Complex(0.5, 0.0), 0.0, 0.0), true, dropped),
      OperatorMatrix(basis, interaction_matrix(params, basis, Complex(0.0, 0.5), 0.0, 0.0), true, dropped),
      OperatorMatrix(basis, diagonal_matrix(basis, params.l, params.k), true),
  };
}

double coherent_tail_weight(double mean_occupation, std::size_t n_max) {
  if (mean_occupation <= 0.0) return 0.0;
  // Poisson terms from n_max + 1 upward, summed in log space until negligible.
  const double log_mean = std::log(mean_occupation);
  double sum = 0.0;
  for (std::size_t n = n_max + 1;; ++n) {
    const double nd = static_cast<double>(n);
    const double term = std::exp(-mean_occupation + nd * log_mean - std::lgamma(nd + 1.0));
    sum += term;
    if (nd > mean_occupation && (term < 1e-300 || term < 1e-18 * sum)) break;
  }
  return sum;
}

Eigen::VectorXcd coherent_state(Complex alpha, std::size_t n_max) {
  const double modulus = std::abs(alpha);
  const double mean = modulus * modulus;
  const double required = mean + 6.0 * modulus;
  if (static_cast<double>(n_max) < required) {
    std::ostringstream msg;
    msg << "coherent state truncation n_max = " << n_max << " below |alpha|^2 + 6|alpha| = " << required;
    throw TruncationError(msg.str(), coherent_tail_weight(mean, n_max));
  }
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_max + 1));
  if (modulus == 0.0) {
    amps[0] = 1.0;
    return amps;
  }
  const double tail = coherent_tail_weight(mean, n_max);
  if (!(tail < kCoherentTailLimit)) {
    std::ostringstream msg;
    msg << "coherent state truncated at n_max = " << n_max << " discards tail weight " << tail;
    throw TruncationError(msg.str(), tail);
  }
  const double log_modulus = std::log(modulus);
  const double phase = std::arg(alpha);
  for (std::size_t n = 0; n <= n_max; ++n) {
    const double nd = static_cast<double>(n);
    const double magnitude = std::exp(-0.5 * mean + nd * log_modulus - 0.5 * std::lgamma(nd + 1.0));
    amps[static_cast<Eigen::Index>(n)] = std::polar(magnitude, nd * phase);
  }
  amps /= amps.norm();
  return amps;
}

double InitialStateSpec::mean_occupation_a() const {
  if (const auto* c = std::get_if<Coherent>(&mode_a)) return std::norm(c->alpha);
  return static_cast<double>(std::get<Fock>(mode_a).n);
}

StateVector product_initial_state(const InitialStateSpec& spec, const ProductBasis& basis) {
  const auto& trunc = basis.truncation();
  if (spec.mode_b.n > trunc.n_b_max) {
    throw ValidationError("initial beta = " + std::to_string(spec.mode_b.n) + " exceeds n_b_max = " +
                          std::to_string(trunc.n_b_max));
  }
  Eigen::VectorXcd mode_a;
  if (const auto* c = std::get_if<Coherent>(&spec.mode_a)) {
    mode_a = coherent_state(c->alpha, trunc.n_a_max);
  } else {
    const auto n = std::get<Fock>(spec.mode_a).n;
    if (n > trunc.n_a_max) {
      throw ValidationError("initial Fock level " + std::to_string(n) + " exceeds n_a_max = " +
                            std::to_string(trunc.n_a_max));
    }
    mode_a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(trunc.n_a_max + 1));
    mode_a[static_cast<Eigen::Index>(n)] = 1.0;
  }
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.dimension()));
  for (std::size_t n_a = 0; n_a <= trunc.n_a_max; ++n_a) {
    amps[static_cast<Eigen::Index>(basis.index(n_a, spec.mode_b.n))] = mode_a[static_cast<Eigen::Index>(n_a)];
  }
  return StateVector(basis, std::move(amps));
}

ModeTruncation sizing_rule(const ModelParams& params, const InitialStateSpec& spec) {
  params.validate();
  const double mean = spec.mean_occupation_a();
  std::size_t n_a_max = 0;
  if (std::holds_alternative<Coherent>(spec.mode_a)) {
    n_a_max = static_cast<std::size_t>(std::ceil(mean + 6.0 * std::sqrt(mean) + 10.0));
    while (coherent_tail_weight(mean, n_a_max) >= kCoherentTailLimit) ++n_a_max;
  } else {
    n_a_max = std::get<Fock>(spec.mode_a).n + 10;
  }
  const auto k = static_cast<std::size_t>(params.k);
  const auto l = static_cast<std::size_t>(params.l);
  const std::size_t n_b_max = spec.mode_b.n + (l * n_a_max + k - 1) / k;
  return {n_a_max, n_b_max};
}

double boundary_leakage(const ModelParams& params, const StateVector& state) {
  params.validate();
  const auto k = static_cast<std::size_t>(params.k);
  const auto l = static_cast<std::size_t>(params.l);
  const auto& basis = state.basis();
  const auto& trunc = basis.truncation();
  double sum = 0.0;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const double weight = std::norm(state.amplitudes()[static_cast<Eigen::Index>(i)]);
    if (weight == 0.0) continue;
    const auto lv = basis.levels(i);
    if (lv.n_a >= k && lv.n_b + l > trunc.n_b_max) {
      const double f = lowering_factor(lv.n_a, k) * lowering_factor(lv.n_b + l, l);
      sum += weight * f * f;
    }
    if (lv.n_b >= l && lv.n_a + k > trunc.n_a_max) {
      const double f = lowering_factor(lv.n_a + k, k) * lowering_factor(lv.n_b, l);
      sum += weight * f * f;
    }
  }
  return params.g * std::sqrt(sum);
}

}  // namespace subharmonic
