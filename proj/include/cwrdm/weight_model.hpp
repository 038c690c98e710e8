#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace cwrdm {

/// Integer weight vector, one entry per Cartan generator.
using WeightVec = std::vector<int>;

/// Weight system of a single particle space: D orthonormal basis vectors,
/// each carrying an integer weight vector of length cartan_dim.
///
/// Weights use the doubled convention (an SU(2) entry is 2x the spin) so
/// that every weight is an exact integer. The stored order of the weight
/// list is part of the model's identity: every basis index r used downstream
/// (partitions, states, b-vectors) refers to this order.
struct WeightModel {
  int cartan_dim = 1;
  std::vector<WeightVec> weights;
  std::string label;

  int dim() const { return static_cast<int>(weights.size()); }

  WeightVec weight_sum() const {
    WeightVec s(cartan_dim, 0);
    for (const auto& a : weights)
      for (int i = 0; i < cartan_dim; ++i) s[i] += a[i];
    return s;
  }

  /// True for models assembled from full representations.
  bool weights_sum_to_zero() const {
    const WeightVec s = weight_sum();
    return std::all_of(s.begin(), s.end(), [](int v) { return v == 0; });
  }

  void validate() const {
    if (cartan_dim < 1) throw std::invalid_argument("WeightModel: cartan_dim must be >= 1");
    if (weights.empty()) throw std::invalid_argument("WeightModel: needs at least one weight");
    for (const auto& a : weights)
      if (static_cast<int>(a.size()) != cartan_dim)
        throw std::invalid_argument("WeightModel: weight vector length != cartan_dim");
  }
};

/// SU(2) irreducible of dimension two_j + 1: doubled weights
/// -two_j, -two_j + 2, ..., +two_j in ascending order.
inline WeightModel spin_model(int two_j) {
  if (two_j < 0) throw std::invalid_argument("spin_model: two_j must be >= 0");
  WeightModel m;
  m.cartan_dim = 1;
  for (int r = 0; r <= two_j; ++r) m.weights.push_back({-two_j + 2 * r});
  m.label = "spin(two_j=" + std::to_string(two_j) + ")";
  return m;
}

/// Concatenates the weight lists; all inputs must share cartan_dim.
inline WeightModel direct_sum(const std::vector<WeightModel>& models) {
  if (models.empty()) throw std::invalid_argument("direct_sum: empty model list");
  WeightModel m;
  m.cartan_dim = models.front().cartan_dim;
  m.label = "sum(";
  for (std::size_t k = 0; k < models.size(); ++k) {
    if (models[k].cartan_dim != m.cartan_dim)
      throw std::invalid_argument("direct_sum: mismatched cartan_dim");
    m.weights.insert(m.weights.end(), models[k].weights.begin(), models[k].weights.end());
    m.label += (k ? "," : "") + models[k].label;
  }
  m.label += ")";
  return m;
}

/// SU(3) defining representation, cartan_dim = 2.
///
/// Normalization: the two Cartan generators are fixed as diag(1,-1,0) and
/// diag(1,1,-2), giving weight vectors (1,1), (-1,1), (0,-2) which are then
/// stored in ascending lexicographic order. Any other integer normalization
/// works equally well; all downstream relations are homogeneous in the
/// weight scale per Cartan component.
inline WeightModel su3_fundamental() {
  WeightModel m;
  m.cartan_dim = 2;
  m.weights = {{-1, 1}, {0, -2}, {1, 1}};
  m.label = "su3_fundamental";
  return m;
}

enum class ConstraintKind { LinearWeight, QuadraticWeight, Custom };

/// Admissible-tuple constraint on frequency vectors.
///
/// linear-weight is the constant weight condition (score of basis vector r
/// is its weight vector); quadratic-weight scores r by the squared Euclidean
/// norm of its weight; custom supplies an explicit integer score per basis
/// vector. The constraint selects frequency vectors n with
/// sum_r n_r * score_r == target.
struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::LinearWeight;
  std::vector<long long> target;
  std::vector<long long> scores;  // custom only, one per basis vector

  void validate(const WeightModel& model) const {
    switch (kind) {
      case ConstraintKind::LinearWeight:
        if (static_cast<int>(target.size()) != model.cartan_dim)
          throw std::invalid_argument("ConstraintSpec: linear-weight target length != cartan_dim");
        break;
      case ConstraintKind::QuadraticWeight:
        if (target.size() != 1)
          throw std::invalid_argument("ConstraintSpec: quadratic-weight target must be scalar");
        break;
      case ConstraintKind::Custom:
        if (target.size() != 1)
          throw std::invalid_argument("ConstraintSpec: custom target must be scalar");
        if (scores.size() != model.weights.size())
          throw std::invalid_argument("ConstraintSpec: custom needs one score per basis vector");
        break;
    }
  }
};

}  // namespace cwrdm
