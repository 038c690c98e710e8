#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cwrdm/partitions.hpp"
#include "cwrdm/rational.hpp"
#include "cwrdm/rdm.hpp"
#include "cwrdm/state_space.hpp"

namespace cwrdm {

/// Rational coefficients b_r = alpha_r - S/slots for one Cartan component.
/// Annihilates every frequency vector of the (slots, S) solution set
/// exactly: sum_r b_r n_r = 0 for every partition.
struct BVector {
  std::vector<Rational> values;  // one per basis vector
  int component = 0;             // Cartan component this vector belongs to
  int slots = 0;
  long long target = 0;  // S for this component

  Rational sum() const {
    Rational s;
    for (const auto& v : values) s += v;
    return s;
  }
};

/// The explicit solution b_r = alpha_r - S/slots, one BVector per Cartan
/// component, exact rationals end to end.
inline std::vector<BVector> b_vector(const WeightModel& model, int slots, const WeightVec& s) {
  model.validate();
  if (slots < 1) throw std::invalid_argument("b_vector: slots must be >= 1");
  if (static_cast<int>(s.size()) != model.cartan_dim)
    throw std::invalid_argument("b_vector: target length != cartan_dim");
  std::vector<BVector> out;
  for (int i = 0; i < model.cartan_dim; ++i) {
    BVector b;
    b.component = i;
    b.slots = slots;
    b.target = s[i];
    const Rational shift(s[i], slots);
    for (const auto& alpha : model.weights) b.values.push_back(Rational(alpha[i]) - shift);
    out.push_back(std::move(b));
  }
  return out;
}

/// One evaluated linear relation on RDM diagonals.
struct ResidualReport {
  std::vector<double> absolute;  // |sum_r b_r T_r| per Cartan component
  std::vector<double> relative;  // absolute / sum_r |b_r| T_r (0 when the mass vanishes)
  bool vacuous = false;          // solution set empty; residual defined as 0
};

namespace detail {

/// T_r = sum over positions * outside `positions` of the diagonal RDM entry
/// rho^{positions u {*}}_(I0; r), accumulated in one pass over the support.
inline std::vector<double> star_sums(const StateVector& state, const std::vector<int>& positions,
                                     const MultiIndex& i0) {
  const int n = state.shape.num_particles;
  const int d = state.shape.model.dim();
  std::vector<bool> fixed(n, false);
  for (int p : positions) {
    if (p < 0 || p >= n) throw std::invalid_argument("relation_residual: position out of range");
    if (fixed[p]) throw std::invalid_argument("relation_residual: duplicate position");
    fixed[p] = true;
  }
  std::vector<double> t(d, 0.0);
  state.for_each([&](const MultiIndex& index, Complex a) {
    for (std::size_t k = 0; k < positions.size(); ++k)
      if (index[positions[k]] != i0[k]) return;
    const double w = std::norm(a);
    if (w == 0.0) return;
    for (int p = 0; p < n; ++p)
      if (!fixed[p]) t[index[p]] += w;
  });
  return t;
}

inline ResidualReport residual_from_sums(const WeightModel& model, int slots, const WeightVec& s,
                                         const std::vector<double>& t, bool vacuous) {
  ResidualReport report;
  report.vacuous = vacuous;
  if (vacuous) {
    report.absolute.assign(model.cartan_dim, 0.0);
    report.relative.assign(model.cartan_dim, 0.0);
    return report;
  }
  for (const auto& b : b_vector(model, slots, s)) {
    double acc = 0, scale = 0;
    for (int r = 0; r < model.dim(); ++r) {
      const double br = b.values[r].to_double();
      acc += br * t[r];
      scale += std::abs(br) * t[r];
    }
    report.absolute.push_back(std::abs(acc));
    report.relative.push_back(scale > 0 ? std::abs(acc) / scale : 0.0);
  }
  return report;
}

}  // namespace detail

/// Evaluates |sum_r b_r sum_* rho^{positions u {*}}_(I0;r)| per Cartan
/// component, with b from the (w - weight(I0), N - M) context. The canonical
/// context uses the prefix positions {1..M}; arbitrary positions cover the
/// relabeled variants. For a state supported on the w sector and a feasible
/// context, every component vanishes up to rounding.
inline ResidualReport relation_residual(const StateVector& state, const std::vector<int>& positions,
                                        const MultiIndex& i0, const WeightVec& w) {
  state.shape.validate();
  const int n = state.shape.num_particles;
  const int m = static_cast<int>(positions.size());
  if (m < 1 || m > n - 1) throw std::invalid_argument("relation_residual: need 1 <= M <= N-1");
  if (i0.size() != positions.size())
    throw std::invalid_argument("relation_residual: I0 length != position count");
  if (static_cast<int>(w.size()) != state.shape.model.cartan_dim)
    throw std::invalid_argument("relation_residual: weight length != cartan_dim");

  WeightVec s(w);
  for (std::size_t k = 0; k < i0.size(); ++k) {
    const auto& alpha = state.shape.model.weights.at(i0[k]);
    for (int i = 0; i < state.shape.model.cartan_dim; ++i) s[i] -= alpha[i];
  }
  const int slots = n - m;
  const bool vacuous = !sector_nonempty(state.shape.model, slots, s);
  const auto t = vacuous ? std::vector<double>() : detail::star_sums(state, positions, i0);
  return detail::residual_from_sums(state.shape.model, slots, s, t, vacuous);
}

/// Residual with the canonical prefix positions {1..M}.
inline ResidualReport relation_residual(const StateVector& state, int m, const MultiIndex& i0,
                                        const WeightVec& w) {
  std::vector<int> positions(m);
  for (int k = 0; k < m; ++k) positions[k] = k;
  return relation_residual(state, positions, i0, w);
}

struct ContextResidual {
  int m = 0;
  MultiIndex i0;
  WeightVec s;
  bool vacuous = false;
  std::vector<double> absolute;
  std::vector<double> relative;
};

/// Sweeps every context (M, I0) with prefix positions over the given M
/// range, reusing one support pass per M. Deterministic context order:
/// ascending M, lexicographic I0.
inline std::vector<ContextResidual> residual_sweep(const StateVector& state, const WeightVec& w,
                                                   int m_min, int m_max) {
  state.shape.validate();
  const int n = state.shape.num_particles;
  const int d = state.shape.model.dim();
  const int c = state.shape.model.cartan_dim;
  if (m_min < 1 || m_max > n - 1 || m_min > m_max)
    throw std::invalid_argument("residual_sweep: need 1 <= m_min <= m_max <= N-1");

  std::map<std::pair<int, WeightVec>, bool> feasible_cache;
  std::vector<ContextResidual> out;

  for (int m = m_min; m <= m_max; ++m) {
    std::size_t prefix_count = 1;
    for (int k = 0; k < m; ++k) prefix_count *= static_cast<std::size_t>(d);
    std::vector<double> sums(prefix_count * d, 0.0);
    state.for_each([&](const MultiIndex& index, Complex a) {
      const double mass = std::norm(a);
      if (mass == 0.0) return;
      std::size_t prefix = 0;
      for (int k = 0; k < m; ++k) prefix = prefix * d + static_cast<std::size_t>(index[k]);
      double* row = &sums[prefix * d];
      for (int p = m; p < n; ++p) row[index[p]] += mass;
    });

    MultiIndex i0(m, 0);
    for (std::size_t prefix = 0; prefix < prefix_count; ++prefix) {
      ContextResidual ctx;
      ctx.m = m;
      ctx.i0 = i0;
      ctx.s = w;
      for (int k = 0; k < m; ++k) {
        const auto& alpha = state.shape.model.weights[i0[k]];
        for (int i = 0; i < c; ++i) ctx.s[i] -= alpha[i];
      }
      const int slots = n - m;
      auto key = std::make_pair(slots, ctx.s);
      auto it = feasible_cache.find(key);
      if (it == feasible_cache.end())
        it = feasible_cache.emplace(key, sector_nonempty(state.shape.model, slots, ctx.s)).first;
      const std::vector<double> t(sums.begin() + static_cast<std::ptrdiff_t>(prefix * d),
                                  sums.begin() + static_cast<std::ptrdiff_t>((prefix + 1) * d));
      auto report = detail::residual_from_sums(state.shape.model, slots, ctx.s, t, !it->second);
      ctx.vacuous = report.vacuous;
      ctx.absolute = std::move(report.absolute);
      ctx.relative = std::move(report.relative);
      out.push_back(std::move(ctx));

      for (int k = m - 1; k >= 0; --k) {
        if (++i0[k] < d) break;
        i0[k] = 0;
      }
    }
  }
  return out;
}

struct InductionShift {
  std::vector<Rational> delta;   // per Cartan component
  std::vector<BVector> b_prime;  // per Cartan component, at slots N - M + 1
};

/// The M -> M-1 step: delta = S/(N-M) - S'/(N-M+1), independent of r, and
/// b'_r = b_r + delta = alpha_r - S'/(N-M+1) exactly.
inline InductionShift induction_shift(const WeightModel& model, int n, int m, const WeightVec& s,
                                      const WeightVec& s_prime) {
  model.validate();
  if (m < 1 || m > n - 1) throw std::invalid_argument("induction_shift: need 1 <= M <= N-1");
  if (static_cast<int>(s.size()) != model.cartan_dim ||
      static_cast<int>(s_prime.size()) != model.cartan_dim)
    throw std::invalid_argument("induction_shift: target length != cartan_dim");
  const int slots = n - m;
  InductionShift out;
  const auto base = b_vector(model, slots, s);
  for (int i = 0; i < model.cartan_dim; ++i) {
    const Rational delta = Rational(s[i], slots) - Rational(s_prime[i], slots + 1);
    out.delta.push_back(delta);
    BVector shifted;
    shifted.component = i;
    shifted.slots = slots + 1;
    shifted.target = s_prime[i];
    for (const auto& b : base[i].values) shifted.values.push_back(b + delta);
    out.b_prime.push_back(std::move(shifted));
  }
  return out;
}

struct TraceOfTraceReport {
  std::vector<double> lhs;  // indexed by I0 at the kept position
  std::vector<double> rhs;  // (N-1) * single-particle RDM diagonal
  double max_abs_diff = 0.0;
};

/// Checks sum_{* != k} sum_{i*} rho^{(k,*)}_(I0;i*) == (N-1) * diagonal of
/// the one-particle RDM at position k, entry by entry.
inline TraceOfTraceReport trace_of_trace_check(const StateVector& state, int kept_position = 0) {
  state.shape.validate();
  const int n = state.shape.num_particles;
  const int d = state.shape.model.dim();
  if (kept_position < 0 || kept_position >= n)
    throw std::invalid_argument("trace_of_trace_check: position out of range");

  TraceOfTraceReport report;
  report.lhs.assign(d, 0.0);
  report.rhs.assign(d, 0.0);

  for (int star = 0; star < n; ++star) {
    if (star == kept_position) continue;
    std::vector<int> traced;
    for (int p = 0; p < n; ++p)
      if (p != kept_position && p != star) traced.push_back(p);
    if (traced.empty()) {
      // N = 2: the pair matrix is psi (x) psi* itself; its diagonal is |a|^2
      state.for_each([&](const MultiIndex& index, Complex a) {
        report.lhs[index[kept_position]] += std::norm(a);
      });
      continue;
    }
    const auto rdm = partial_trace(state, traced);
    // kept pair is (min, max); locate which slot carries I0
    const bool i0_first = kept_position < star;
    for (int i0 = 0; i0 < d; ++i0)
      for (int istar = 0; istar < d; ++istar) {
        const std::size_t lin = i0_first
                                    ? static_cast<std::size_t>(i0) * d + istar
                                    : static_cast<std::size_t>(istar) * d + i0;
        report.lhs[i0] += rdm.at(lin, lin).real();
      }
  }

  std::vector<int> all_but;
  for (int p = 0; p < n; ++p)
    if (p != kept_position) all_but.push_back(p);
  const auto single = partial_trace(state, all_but);
  for (int i0 = 0; i0 < d; ++i0)
    report.rhs[i0] = (n - 1) * single.at(static_cast<std::size_t>(i0), i0).real();

  for (int i0 = 0; i0 < d; ++i0)
    report.max_abs_diff = std::max(report.max_abs_diff, std::abs(report.lhs[i0] - report.rhs[i0]));
  return report;
}

struct PerfectDeviationEntry {
  std::vector<int> traced;  // the set Lambda, 0-based positions
  double deviation = 0.0;
};

struct PerfectDeviationReport {
  std::vector<PerfectDeviationEntry> table;
  double max_deviation = 0.0;
};

/// Deviation from a maximally mixed marginal for every traced set Lambda
/// with |Lambda| >= ceil(N/2); zero everywhere characterizes a perfect
/// tensor.
inline PerfectDeviationReport perfect_deviation(const StateVector& state) {
  state.shape.validate();
  const int n = state.shape.num_particles;
  if (n > 24) throw std::invalid_argument("perfect_deviation: N too large for subset sweep");
  const int half = (n + 1) / 2;

  PerfectDeviationReport report;
  for (unsigned mask = 1; mask < (1u << n) - 1; ++mask) {
    const int size = __builtin_popcount(mask);
    if (size < half) continue;
    PerfectDeviationEntry entry;
    for (int p = 0; p < n; ++p)
      if (mask & (1u << p)) entry.traced.push_back(p);
    entry.deviation = deviation_from_maximally_mixed(partial_trace(state, entry.traced));
    report.max_deviation = std::max(report.max_deviation, entry.deviation);
    report.table.push_back(std::move(entry));
  }
  return report;
}

struct ImpossibilityWitness {
  int m = 0;
  MultiIndex i0;
  WeightVec s;
  int component = 0;  // Cartan component with S != 0
  BVector b;
  Rational contradiction_value;  // sum_r b_r, nonzero
};

/// Finds a context (M, I0) with M + 1 <= floor(N/2), nonempty solution set,
/// and sum_r b_r != 0; a perfect tensor in the w sector would force all
/// diagonals in the context to agree, contradicting the vanishing relation.
/// Contexts are searched by ascending M, then lexicographic I0, so the
/// returned witness is deterministic.
inline ImpossibilityWitness impossibility_witness(const WeightModel& model, int n,
                                                  const WeightVec& w) {
  model.validate();
  if (n < 4) throw std::invalid_argument("impossibility_witness: requires N >= 4");
  if (static_cast<int>(w.size()) != model.cartan_dim)
    throw std::invalid_argument("impossibility_witness: weight length != cartan_dim");
  if (!sector_nonempty(model, n, w))
    throw std::invalid_argument("impossibility_witness: empty weight sector");

  const int d = model.dim();
  for (int m = 1; m + 1 <= n / 2; ++m) {
    const int slots = n - m;
    MultiIndex i0(m, 0);
    std::size_t count = 1;
    for (int k = 0; k < m; ++k) count *= static_cast<std::size_t>(d);
    for (std::size_t it = 0; it < count; ++it) {
      WeightVec s(w);
      for (int k = 0; k < m; ++k)
        for (int i = 0; i < model.cartan_dim; ++i) s[i] -= model.weights[i0[k]][i];

      if (sector_nonempty(model, slots, s)) {
        const auto bs = b_vector(model, slots, s);
        for (int i = 0; i < model.cartan_dim; ++i) {
          if (s[i] == 0) continue;
          const Rational total = bs[i].sum();
          if (!total.is_zero()) {
            ImpossibilityWitness witness;
            witness.m = m;
            witness.i0 = i0;
            witness.s = s;
            witness.component = i;
            witness.b = bs[i];
            witness.contradiction_value = total;
            return witness;
          }
        }
      }

      for (int k = m - 1; k >= 0; --k) {
        if (++i0[k] < d) break;
        i0[k] = 0;
      }
    }
  }
  throw std::runtime_error("impossibility_witness: no feasible witness found");
}

}  // namespace cwrdm
