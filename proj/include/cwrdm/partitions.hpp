#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cwrdm/rational.hpp"
#include "cwrdm/weight_model.hpp"

namespace cwrdm {

/// One coset of the ordered solution set under permutation, stored as the
/// frequency vector n_r of each basis index r. Frequencies are indexed by
/// basis position, not by distinct weight value, so direct sums with
/// repeated weights behave correctly.
struct Partition {
  std::vector<int> frequencies;
};

/// All frequency vectors for a fixed (slots, target) constraint, stacked as
/// rows. Rows are distinct and sorted in descending lexicographic order;
/// that order is part of the file-format contract.
struct FrequencyMatrix {
  WeightModel model;
  int slots = 0;
  std::vector<long long> target;
  std::vector<std::vector<int>> rows;
};

namespace detail {

/// Depth-first enumeration of frequency vectors n >= 0 with sum(n) == slots
/// and sum_r n_r * scores[r] == target, emitted in descending lexicographic
/// order. Pruning uses suffix min/max score bounds per component. The
/// visitor returns false to stop early.
inline void for_each_frequency(const std::vector<std::vector<long long>>& scores, int slots,
                               const std::vector<long long>& target,
                               const std::function<bool(const std::vector<int>&)>& visit) {
  const int d = static_cast<int>(scores.size());
  const int c = static_cast<int>(target.size());
  std::vector<std::vector<long long>> sufmin(d + 1, std::vector<long long>(c)),
      sufmax(d + 1, std::vector<long long>(c));
  for (int i = 0; i < c; ++i) {
    sufmin[d][i] = INT64_MAX;
    sufmax[d][i] = INT64_MIN;
  }
  for (int r = d - 1; r >= 0; --r)
    for (int i = 0; i < c; ++i) {
      sufmin[r][i] = std::min(sufmin[r + 1][i], scores[r][i]);
      sufmax[r][i] = std::max(sufmax[r + 1][i], scores[r][i]);
    }

  std::vector<int> freq(d, 0);
  std::vector<long long> rem(target);
  bool stop = false;

  std::function<void(int, int)> rec = [&](int r, int left) {
    if (stop) return;
    if (r == d) {
      if (left == 0 && std::all_of(rem.begin(), rem.end(), [](long long v) { return v == 0; }))
        if (!visit(freq)) stop = true;
      return;
    }
    for (int i = 0; i < c; ++i) {
      const long long lo = left == 0 ? 0 : left * sufmin[r][i];
      const long long hi = left == 0 ? 0 : left * sufmax[r][i];
      if (rem[i] < std::min(lo, hi) || rem[i] > std::max(lo, hi)) return;
    }
    for (int n = left; n >= 0 && !stop; --n) {
      freq[r] = n;
      for (int i = 0; i < c; ++i) rem[i] -= static_cast<long long>(n) * scores[r][i];
      rec(r + 1, left - n);
      for (int i = 0; i < c; ++i) rem[i] += static_cast<long long>(n) * scores[r][i];
    }
    freq[r] = 0;
  };
  rec(0, slots);
}

inline std::vector<std::vector<long long>> weight_scores(const WeightModel& model) {
  std::vector<std::vector<long long>> scores;
  scores.reserve(model.weights.size());
  for (const auto& a : model.weights) scores.emplace_back(a.begin(), a.end());
  return scores;
}

}  // namespace detail

/// Partitions of the constraint sum_k x_k = target over `slots` entries
/// drawn from the model's weight list, in canonical (descending lex) order.
inline std::vector<Partition> enumerate_partitions(const WeightModel& model, int slots,
                                                   const WeightVec& target) {
  model.validate();
  if (slots < 1) throw std::invalid_argument("enumerate_partitions: slots must be >= 1");
  if (static_cast<int>(target.size()) != model.cartan_dim)
    throw std::invalid_argument("enumerate_partitions: target length != cartan_dim");
  std::vector<Partition> out;
  detail::for_each_frequency(detail::weight_scores(model), slots,
                             std::vector<long long>(target.begin(), target.end()),
                             [&](const std::vector<int>& freq) {
                               out.push_back(Partition{freq});
                               return true;
                             });
  return out;
}

/// True iff the solution set for (slots, target) is nonempty.
inline bool sector_nonempty(const WeightModel& model, int slots, const WeightVec& target) {
  bool found = false;
  detail::for_each_frequency(detail::weight_scores(model), slots,
                             std::vector<long long>(target.begin(), target.end()),
                             [&](const std::vector<int>&) {
                               found = true;
                               return false;
                             });
  return found;
}

/// All ordered tuples of basis indices (0-based) whose weights sum to
/// target. Obtained by expanding the multiset permutations of each
/// partition; tuples are grouped by partition in canonical partition order.
/// Repeated identical weights from non-irreducible models count separately
/// because enumeration is by basis index.
inline std::vector<std::vector<int>> enumerate_tuples(const WeightModel& model, int slots,
                                                      const WeightVec& target) {
  std::vector<std::vector<int>> out;
  for (const auto& part : enumerate_partitions(model, slots, target)) {
    std::vector<int> indices;
    for (int r = 0; r < model.dim(); ++r)
      indices.insert(indices.end(), part.frequencies[r], r);
    do {
      out.push_back(indices);
    } while (std::next_permutation(indices.begin(), indices.end()));
  }
  return out;
}

/// Maps a basis-index tuple to its weight tuple.
inline std::vector<WeightVec> tuple_weights(const WeightModel& model,
                                            const std::vector<int>& indices) {
  std::vector<WeightVec> w;
  w.reserve(indices.size());
  for (int r : indices) w.push_back(model.weights.at(r));
  return w;
}

/// Frequency matrix of all admissible frequency vectors under an arbitrary
/// constraint (constant weight, quadratic weight, or custom scores).
inline FrequencyMatrix enumerate_constrained(const WeightModel& model, int slots,
                                             const ConstraintSpec& spec) {
  model.validate();
  spec.validate(model);
  if (slots < 1) throw std::invalid_argument("enumerate_constrained: slots must be >= 1");

  std::vector<std::vector<long long>> scores;
  switch (spec.kind) {
    case ConstraintKind::LinearWeight:
      scores = detail::weight_scores(model);
      break;
    case ConstraintKind::QuadraticWeight:
      for (const auto& a : model.weights) {
        long long q = 0;
        for (int v : a) q += static_cast<long long>(v) * v;
        scores.push_back({q});
      }
      break;
    case ConstraintKind::Custom:
      for (long long s : spec.scores) scores.push_back({s});
      break;
  }

  FrequencyMatrix fm;
  fm.model = model;
  fm.slots = slots;
  fm.target = spec.target;
  detail::for_each_frequency(scores, slots, spec.target, [&](const std::vector<int>& freq) {
    fm.rows.push_back(freq);
    return true;
  });
  return fm;
}

/// Constant-weight frequency matrix for (slots, target).
inline FrequencyMatrix frequency_matrix(const WeightModel& model, int slots,
                                        const WeightVec& target) {
  ConstraintSpec spec;
  spec.kind = ConstraintKind::LinearWeight;
  spec.target.assign(target.begin(), target.end());
  return enumerate_constrained(model, slots, spec);
}

namespace detail {

/// Rank of an integer matrix by fraction-free (Bareiss) elimination.
inline int bareiss_rank(std::vector<std::vector<long long>> m) {
  if (m.empty()) return 0;
  const int rows = static_cast<int>(m.size());
  const int cols = static_cast<int>(m[0].size());
  int rank = 0;
  long long prev = 1;
  for (int col = 0; col < cols && rank < rows; ++col) {
    int pivot = -1;
    for (int i = rank; i < rows; ++i)
      if (m[i][col] != 0) {
        pivot = i;
        break;
      }
    if (pivot < 0) continue;
    std::swap(m[rank], m[pivot]);
    for (int i = rank + 1; i < rows; ++i) {
      for (int j = col + 1; j < cols; ++j) {
        __int128 v = (__int128)m[rank][col] * m[i][j] - (__int128)m[i][col] * m[rank][j];
        v /= prev;  // exact by the Bareiss identity
        if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("bareiss_rank: overflow");
        m[i][j] = static_cast<long long>(v);
      }
      m[i][col] = 0;
    }
    prev = m[rank][col];
    ++rank;
  }
  return rank;
}

/// Basis of the rational null space of an integer matrix (cols = width).
inline std::vector<std::vector<Rational>> nullspace(const std::vector<std::vector<long long>>& a,
                                                    int cols) {
  const int rows = static_cast<int>(a.size());
  std::vector<std::vector<Rational>> m(rows, std::vector<Rational>(cols));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m[i][j] = Rational(a[i][j]);

  std::vector<int> pivot_col;
  int r = 0;
  for (int col = 0; col < cols && r < rows; ++col) {
    int pr = -1;
    for (int i = r; i < rows; ++i)
      if (!m[i][col].is_zero()) {
        pr = i;
        break;
      }
    if (pr < 0) continue;
    std::swap(m[r], m[pr]);
    const Rational inv = Rational(1) / m[r][col];
    for (int j = col; j < cols; ++j) m[r][j] *= inv;
    for (int i = 0; i < rows; ++i) {
      if (i == r || m[i][col].is_zero()) continue;
      const Rational f = m[i][col];
      for (int j = col; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    pivot_col.push_back(col);
    ++r;
  }

  std::vector<bool> is_pivot(cols, false);
  for (int c : pivot_col) is_pivot[c] = true;
  std::vector<std::vector<Rational>> basis;
  for (int free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<Rational> v(cols);
    v[free] = Rational(1);
    for (int i = 0; i < static_cast<int>(pivot_col.size()); ++i) v[pivot_col[i]] = -m[i][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

/// Scales a rational vector to coprime integers with positive leading entry.
inline std::vector<Rational> normalize_direction(std::vector<Rational> v) {
  long long lcm = 1;
  for (const auto& x : v) lcm = std::lcm(lcm, x.den());
  long long g = 0;
  for (auto& x : v) {
    x *= Rational(lcm);
    g = std::gcd(g, x.num());
  }
  if (g > 1)
    for (auto& x : v) x /= Rational(g);
  for (const auto& x : v) {
    if (x.is_zero()) continue;
    if (x.num() < 0)
      for (auto& y : v) y = -y;
    break;
  }
  return v;
}

}  // namespace detail

struct RankAnalysis {
  int rank_a = 0;
  int rank_a_tilde = 0;
  /// Present iff rank_a_tilde == rank_a + 1; then A*b == 0 and sum(b) != 0,
  /// both exact. Scaled to coprime integer entries.
  std::optional<std::vector<Rational>> witness_b;
};

/// Exact ranks over the rationals of the frequency matrix A and of A with an
/// appended all-ones row, plus a witness null vector with nonzero entry sum
/// when one exists.
inline RankAnalysis rank_analysis(const FrequencyMatrix& fm) {
  if (fm.rows.empty()) throw std::invalid_argument("rank_analysis: empty frequency matrix");
  const int d = static_cast<int>(fm.rows.front().size());
  std::vector<std::vector<long long>> a;
  for (const auto& row : fm.rows) a.emplace_back(row.begin(), row.end());

  RankAnalysis out;
  out.rank_a = detail::bareiss_rank(a);
  auto a_tilde = a;
  a_tilde.emplace_back(d, 1);
  out.rank_a_tilde = detail::bareiss_rank(a_tilde);

  if (out.rank_a_tilde == out.rank_a + 1) {
    for (auto& v : detail::nullspace(a, d)) {
      Rational s;
      for (const auto& x : v) s += x;
      if (!s.is_zero()) {
        out.witness_b = detail::normalize_direction(std::move(v));
        break;
      }
    }
  }
  return out;
}

/// Number of partitions for an SU(2) irreducible model, by coefficient
/// extraction: count frequency vectors with sum(n) == slots and
/// sum_r n_r * (r-1) == (target + slots*(D-1)) / 2 via dynamic programming
/// on the shifted grading (alpha_r + D - 1) / 2 = r - 1. Equals the length
/// of enumerate_partitions on this domain; general models must use the
/// enumeration directly.
inline long long partition_count(const WeightModel& model, int slots, long long target) {
  model.validate();
  if (slots < 1) throw std::invalid_argument("partition_count: slots must be >= 1");
  const int d = model.dim();
  if (model.cartan_dim != 1)
    throw std::invalid_argument("partition_count: model must be an SU(2) irreducible");
  for (int r = 0; r < d; ++r)
    if (model.weights[r][0] != -(d - 1) + 2 * r)
      throw std::invalid_argument("partition_count: model must be an SU(2) irreducible");

  const long long shifted = target + static_cast<long long>(slots) * (d - 1);
  if (shifted < 0 || shifted % 2 != 0) return 0;
  const long long grade = shifted / 2;
  if (grade > static_cast<long long>(slots) * (d - 1)) return 0;

  // ways[s][g]: frequency vectors over items 0..r-1 with s slots, grade g
  std::vector<std::vector<long long>> ways(slots + 1, std::vector<long long>(grade + 1, 0));
  ways[0][0] = 1;
  for (int r = 0; r < d; ++r)
    for (int s = 1; s <= slots; ++s)
      for (long long g = r; g <= grade; ++g) ways[s][g] += ways[s - 1][g - r];
  return ways[slots][grade];
}

}  // namespace cwrdm
