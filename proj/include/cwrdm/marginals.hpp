#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cwrdm/rdm.hpp"
#include "cwrdm/relations.hpp"
#include "cwrdm/state_space.hpp"

namespace cwrdm {

/// Two-body marginal data: one D^2 x D^2 Hermitian matrix per unordered
/// particle pair {p, q}, keyed with p < q (0-based), stored row-major with
/// joint index order (i_p, i_q).
struct MarginalFamily {
  SystemShape shape;
  std::map<std::pair<int, int>, std::vector<Complex>> entries;

  std::size_t pair_dim() const {
    const std::size_t d = shape.model.weights.size();
    return d * d;
  }

  const std::vector<Complex>& pair(int p, int q) const {
    auto it = entries.find({std::min(p, q), std::max(p, q)});
    if (it == entries.end()) throw std::invalid_argument("MarginalFamily: missing pair");
    return it->second;
  }

  bool has_pair(int p, int q) const {
    return entries.count({std::min(p, q), std::max(p, q)}) > 0;
  }

  /// True when every pair {site, q} is present.
  bool has_star(int site) const {
    for (int q = 0; q < shape.num_particles; ++q)
      if (q != site && !has_pair(site, q)) return false;
    return true;
  }
};

/// Builds the family from a pure state: all pairs, or only the pivot's star.
inline MarginalFamily family_from_state(const StateVector& state,
                                        std::optional<int> pivot = std::nullopt) {
  state.shape.validate();
  const int n = state.shape.num_particles;
  MarginalFamily family;
  family.shape = state.shape;
  for (int p = 0; p < n; ++p)
    for (int q = p + 1; q < n; ++q) {
      if (pivot && *pivot != p && *pivot != q) continue;
      std::vector<int> traced;
      for (int k = 0; k < n; ++k)
        if (k != p && k != q) traced.push_back(k);
      if (traced.empty()) {
        // N = 2: the pair matrix is the outer product psi (x) psi*
        const std::size_t dim = family.pair_dim();
        std::vector<Complex> dense(dim, Complex{0, 0});
        state.for_each([&](const MultiIndex& index, Complex a) {
          dense[linear_index(state.shape, index)] = a;
        });
        std::vector<Complex> outer(dim * dim);
        for (std::size_t i = 0; i < dim; ++i)
          for (std::size_t j = 0; j < dim; ++j) outer[i * dim + j] = dense[i] * std::conj(dense[j]);
        family.entries[{p, q}] = std::move(outer);
        continue;
      }
      family.entries[{p, q}] = partial_trace(state, traced).entries;
    }
  return family;
}

namespace detail {

/// Single-site marginal of `site` extracted from the pair matrix {p, q}.
inline std::vector<Complex> site_marginal(const MarginalFamily& family, int p, int q, int site) {
  const int d = family.shape.model.dim();
  const auto& m = family.pair(p, q);
  const std::size_t dim = family.pair_dim();
  const bool site_first = site == std::min(p, q);
  std::vector<Complex> out(static_cast<std::size_t>(d) * d, Complex{0, 0});
  for (int i = 0; i < d; ++i)
    for (int ip = 0; ip < d; ++ip) {
      Complex acc{0, 0};
      for (int j = 0; j < d; ++j) {
        const std::size_t row = site_first ? static_cast<std::size_t>(i) * d + j
                                           : static_cast<std::size_t>(j) * d + i;
        const std::size_t col = site_first ? static_cast<std::size_t>(ip) * d + j
                                           : static_cast<std::size_t>(j) * d + ip;
        acc += m[row * dim + col];
      }
      out[static_cast<std::size_t>(i) * d + ip] = acc;
    }
  return out;
}

inline void require_star(const MarginalFamily& family, int pivot) {
  const int n = family.shape.num_particles;
  if (pivot < 0 || pivot >= n) throw std::invalid_argument("marginals: pivot out of range");
  std::vector<int> missing;
  for (int q = 0; q < n; ++q)
    if (q != pivot && !family.has_pair(pivot, q)) missing.push_back(q);
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "marginals: missing pairs {" << pivot + 1 << ",q} for q in ";
    for (std::size_t i = 0; i < missing.size(); ++i) msg << (i ? "," : "") << missing[i] + 1;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace detail

/// Maximum entrywise deviation among the pivot's single-site marginals
/// obtained from its different partners. Zero for any family descending
/// from one global state.
inline double trivial_compatibility(const MarginalFamily& family, int pivot) {
  detail::require_star(family, pivot);
  const int n = family.shape.num_particles;
  std::optional<std::vector<Complex>> reference;
  double worst = 0;
  for (int q = 0; q < n; ++q) {
    if (q == pivot) continue;
    auto m = detail::site_marginal(family, pivot, q, pivot);
    if (!reference) {
      reference = std::move(m);
      continue;
    }
    for (std::size_t i = 0; i < m.size(); ++i)
      worst = std::max(worst, std::abs(m[i] - (*reference)[i]));
  }
  return worst;
}

struct FamilySanity {
  double max_hermiticity_error = 0.0;
  double max_trace_gap = 0.0;
  double min_eigenvalue = 0.0;
};

/// Hermiticity / trace / positivity diagnostics over all supplied pairs.
inline FamilySanity family_sanity(const MarginalFamily& family, double expected_trace = 1.0) {
  FamilySanity s;
  s.min_eigenvalue = 1.0;
  const std::size_t dim = family.pair_dim();
  for (const auto& [key, m] : family.entries) {
    double trace = 0;
    for (std::size_t i = 0; i < dim; ++i) {
      trace += m[i * dim + i].real();
      for (std::size_t j = 0; j < dim; ++j)
        s.max_hermiticity_error =
            std::max(s.max_hermiticity_error, std::abs(m[i * dim + j] - std::conj(m[j * dim + i])));
    }
    s.max_trace_gap = std::max(s.max_trace_gap, std::abs(trace - expected_trace));
    s.min_eigenvalue =
        std::min(s.min_eigenvalue, detail::hermitian_eigenvalues(m, dim).front());
  }
  return s;
}

enum class Verdict { Consistent, Inconsistent, Underdetermined };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return "consistent";
    case Verdict::Inconsistent: return "inconsistent";
    case Verdict::Underdetermined: return "underdetermined";
  }
  return "?";
}

struct CertificateRow {
  int pivot = 0;
  int i0 = 0;                     // single basis index at the pivot
  double population = 0.0;        // sum_r T_r(I0)
  bool has_candidate = false;
  std::vector<double> candidate;  // candidate w0 per Cartan component
  double deviation = 0.0;         // max |candidate - consensus| over components
};

struct CertificateReport {
  Verdict verdict = Verdict::Underdetermined;
  std::optional<WeightVec> w0;    // snapped integer weight, consistent only
  std::vector<double> consensus;  // mean candidate per component
  double spread = 0.0;            // max row deviation from the consensus
  double snap_distance = 0.0;
  bool achievable = false;
  std::vector<CertificateRow> rows;
};

/// Two-body constant-weight liftability certificate.
///
/// For each pivot site with a complete star and each pivot index I0 with
/// population above the floor, the diagonal sums T_r(I0) determine an affine
/// candidate w0(I0) = weight(I0) + (N-1) * sum_r alpha_r T_r / sum_r T_r per
/// Cartan component. Consistent iff all candidates agree within tol, snap to
/// an integer vector within tol, and that vector is an achievable sector
/// weight; inconsistent when candidates disagree; underdetermined when no
/// index carries population.
inline CertificateReport constant_weight_certificate(const MarginalFamily& family, int pivot,
                                                     double tol = 1e-6,
                                                     double population_floor = 1e-9) {
  family.shape.validate();
  detail::require_star(family, pivot);
  const int n = family.shape.num_particles;
  const int d = family.shape.model.dim();
  const int c = family.shape.model.cartan_dim;
  const std::size_t dim = family.pair_dim();

  std::vector<int> pivots{pivot};
  for (int site = 0; site < n; ++site)
    if (site != pivot && family.has_star(site)) pivots.push_back(site);

  CertificateReport report;
  for (int site : pivots) {
    for (int i0 = 0; i0 < d; ++i0) {
      CertificateRow row;
      row.pivot = site;
      row.i0 = i0;
      std::vector<double> weighted(c, 0.0);
      double population = 0;
      for (int q = 0; q < n; ++q) {
        if (q == site) continue;
        const auto& m = family.pair(site, q);
        const bool site_first = site < q;
        for (int r = 0; r < d; ++r) {
          const std::size_t joint = site_first ? static_cast<std::size_t>(i0) * d + r
                                               : static_cast<std::size_t>(r) * d + i0;
          const double t = m[joint * dim + joint].real();
          population += t;
          for (int i = 0; i < c; ++i) weighted[i] += family.shape.model.weights[r][i] * t;
        }
      }
      row.population = population;
      if (std::abs(population) > population_floor) {
        row.has_candidate = true;
        for (int i = 0; i < c; ++i)
          row.candidate.push_back(family.shape.model.weights[i0][i] +
                                  (n - 1) * weighted[i] / population);
      }
      report.rows.push_back(std::move(row));
    }
  }

  std::size_t hits = 0;
  std::vector<double> mean(c, 0.0);
  for (const auto& row : report.rows) {
    if (!row.has_candidate) continue;
    ++hits;
    for (int i = 0; i < c; ++i) mean[i] += row.candidate[i];
  }
  if (hits == 0) {
    report.verdict = Verdict::Underdetermined;
    return report;
  }
  for (int i = 0; i < c; ++i) mean[i] /= static_cast<double>(hits);
  report.consensus = mean;

  for (auto& row : report.rows) {
    if (!row.has_candidate) continue;
    for (int i = 0; i < c; ++i)
      row.deviation = std::max(row.deviation, std::abs(row.candidate[i] - mean[i]));
    report.spread = std::max(report.spread, row.deviation);
  }

  WeightVec snapped(c);
  for (int i = 0; i < c; ++i) {
    snapped[i] = static_cast<int>(std::lround(mean[i]));
    report.snap_distance = std::max(report.snap_distance, std::abs(mean[i] - snapped[i]));
  }
  report.achievable = sector_nonempty(family.shape.model, n, snapped);

  if (report.spread <= tol && report.snap_distance <= tol && report.achievable) {
    report.verdict = Verdict::Consistent;
    report.w0 = snapped;
  } else {
    report.verdict = Verdict::Inconsistent;
  }
  return report;
}

struct WeightMoments {
  std::vector<double> mean_gap;  // sum_w p_w (w - w0), per component
  std::vector<double> variance;  // sum_w p_w (w - w0)^2, per component
};

/// First two moments of the weight distribution around w0, from the
/// orthogonal weight decomposition. Zero variance in every component is
/// equivalent to single-sector support.
inline WeightMoments weight_variance(const StateVector& state, const WeightVec& w0) {
  if (static_cast<int>(w0.size()) != state.shape.model.cartan_dim)
    throw std::invalid_argument("weight_variance: weight length != cartan_dim");
  const int c = state.shape.model.cartan_dim;
  WeightMoments moments;
  moments.mean_gap.assign(c, 0.0);
  moments.variance.assign(c, 0.0);
  for (const auto& [w, comp] : weight_components(state)) {
    const double p = comp.first;
    for (int i = 0; i < c; ++i) {
      const double gap = w[i] - w0[i];
      moments.mean_gap[i] += p * gap;
      moments.variance[i] += p * gap * gap;
    }
  }
  return moments;
}

}  // namespace cwrdm
