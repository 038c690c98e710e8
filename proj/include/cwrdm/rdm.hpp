#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "cwrdm/state_space.hpp"

namespace cwrdm {

namespace detail {

/// Ascending eigenvalues of a Hermitian matrix given in row-major storage.
inline std::vector<double> hermitian_eigenvalues(const std::vector<Complex>& entries,
                                                 std::size_t dim) {
  Eigen::MatrixXcd m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) m(i, j) = entries[i * dim + j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  std::vector<double> ev(dim);
  for (std::size_t i = 0; i < dim; ++i) ev[i] = solver.eigenvalues()(static_cast<Eigen::Index>(i));
  return ev;
}

}  // namespace detail

/// Partial trace of a pure state over the traced particles, represented by
/// its entries over pairs (L, L') of multi-indices on the kept particles,
/// linearized lexicographically with kept positions in ascending original
/// order.
struct ReducedDensity {
  SystemShape shape;
  std::vector<int> kept;  // ascending 0-based particle positions
  std::size_t dim = 0;
  std::vector<Complex> entries;  // row-major dim x dim
  /// Frobenius norm of (R - R^dagger) accumulated before symmetrization;
  /// diagnostic for the contraction's floating-point asymmetry.
  double asymmetry = 0.0;

  Complex at(std::size_t l, std::size_t lp) const { return entries[l * dim + lp]; }

  double trace() const {
    double t = 0;
    for (std::size_t l = 0; l < dim; ++l) t += entries[l * dim + l].real();
    return t;
  }

  double hermiticity_error() const {
    double worst = 0;
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        worst = std::max(worst, std::abs(at(i, j) - std::conj(at(j, i))));
    return worst;
  }

  std::vector<double> eigenvalues() const { return detail::hermitian_eigenvalues(entries, dim); }

  double min_eigenvalue() const { return eigenvalues().front(); }

  /// Eigenvalue count above the tolerance (default 1e-10, the documented
  /// threshold for rank and positivity checks).
  int numeric_rank(double tol = 1e-10) const {
    int rank = 0;
    for (double ev : eigenvalues())
      if (ev > tol) ++rank;
    return rank;
  }

  /// Decodes a linearized kept-index back to a multi-index over kept slots.
  MultiIndex kept_multi_index(std::size_t linear) const {
    const std::size_t d = shape.model.weights.size();
    MultiIndex index(kept.size());
    for (int k = static_cast<int>(kept.size()) - 1; k >= 0; --k) {
      index[k] = static_cast<int>(linear % d);
      linear /= d;
    }
    return index;
  }
};

/// Contracts psi (x) psi* over the traced particle set. Entries follow
/// (L, L') = sum_K a_(L;K) conj(a_(L';K)) with index interleaving respecting
/// original particle positions. The accumulated matrix is symmetrized to
/// (R + R^dagger)/2 and the pre-symmetrization asymmetry norm is kept as a
/// diagnostic.
inline ReducedDensity partial_trace(const StateVector& state, const std::vector<int>& traced) {
  const int n = state.shape.num_particles;
  std::vector<bool> is_traced(n, false);
  for (int p : traced) {
    if (p < 0 || p >= n) throw std::invalid_argument("partial_trace: position out of range");
    if (is_traced[p]) throw std::invalid_argument("partial_trace: duplicate position");
    is_traced[p] = true;
  }
  if (traced.empty() || static_cast<int>(traced.size()) == n)
    throw std::invalid_argument("partial_trace: traced set must be a proper nonempty subset");

  ReducedDensity rdm;
  rdm.shape = state.shape;
  for (int p = 0; p < n; ++p)
    if (!is_traced[p]) rdm.kept.push_back(p);
  const std::size_t d = state.shape.model.weights.size();
  rdm.dim = 1;
  for (std::size_t k = 0; k < rdm.kept.size(); ++k) rdm.dim *= d;
  rdm.entries.assign(rdm.dim * rdm.dim, Complex{0, 0});

  // group support by the traced sub-index, then accumulate outer products
  struct Term {
    std::size_t k_lin, l_lin;
    Complex amp;
  };
  std::vector<Term> terms;
  terms.reserve(state.support_size());
  state.for_each([&](const MultiIndex& index, Complex a) {
    if (a == Complex{0, 0}) return;
    std::size_t k_lin = 0, l_lin = 0;
    for (int p = 0; p < n; ++p) {
      if (is_traced[p])
        k_lin = k_lin * d + static_cast<std::size_t>(index[p]);
      else
        l_lin = l_lin * d + static_cast<std::size_t>(index[p]);
    }
    terms.push_back({k_lin, l_lin, a});
  });
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
    return a.k_lin != b.k_lin ? a.k_lin < b.k_lin : a.l_lin < b.l_lin;
  });

  for (std::size_t lo = 0; lo < terms.size();) {
    std::size_t hi = lo;
    while (hi < terms.size() && terms[hi].k_lin == terms[lo].k_lin) ++hi;
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t j = lo; j < hi; ++j)
        rdm.entries[terms[i].l_lin * rdm.dim + terms[j].l_lin] +=
            terms[i].amp * std::conj(terms[j].amp);
    lo = hi;
  }

  double asym2 = 0;
  for (std::size_t i = 0; i < rdm.dim; ++i)
    for (std::size_t j = i; j < rdm.dim; ++j) {
      const Complex r = rdm.entries[i * rdm.dim + j];
      const Complex rt = std::conj(rdm.entries[j * rdm.dim + i]);
      const Complex avg = 0.5 * (r + rt);
      asym2 += (i == j ? 1.0 : 2.0) * std::norm(r - rt);
      rdm.entries[i * rdm.dim + j] = avg;
      rdm.entries[j * rdm.dim + i] = std::conj(avg);
    }
  rdm.asymmetry = std::sqrt(asym2);
  return rdm;
}

/// Diagonal entries keyed by kept multi-index; values are real up to a
/// -1e-12 rounding guard and sum to the trace.
inline std::map<MultiIndex, double> diagonal(const ReducedDensity& rdm) {
  std::map<MultiIndex, double> out;
  for (std::size_t l = 0; l < rdm.dim; ++l)
    out.emplace(rdm.kept_multi_index(l), rdm.entries[l * rdm.dim + l].real());
  return out;
}

/// Frobenius distance from (trace/dim) * identity; zero exactly
/// characterizes proportionality to the identity.
inline double deviation_from_maximally_mixed(const ReducedDensity& rdm) {
  const double mean = rdm.trace() / static_cast<double>(rdm.dim);
  double s = 0;
  for (std::size_t i = 0; i < rdm.dim; ++i)
    for (std::size_t j = 0; j < rdm.dim; ++j) {
      Complex v = rdm.at(i, j);
      if (i == j) v -= mean;
      s += std::norm(v);
    }
  return std::sqrt(s);
}

}  // namespace cwrdm
