#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "cwrdm/partitions.hpp"
#include "cwrdm/weight_model.hpp"

namespace cwrdm {

using Complex = std::complex<double>;

/// Multi-index over the product basis; entries are 0-based basis positions.
/// (The JSON file format uses 1-based entries.)
using MultiIndex = std::vector<int>;

/// N identical particle spaces over one weight model.
struct SystemShape {
  WeightModel model;
  int num_particles = 2;

  void validate() const {
    model.validate();
    if (num_particles < 2) throw std::invalid_argument("SystemShape: N must be >= 2");
  }

  std::size_t full_dimension() const {
    std::size_t dim = 1;
    for (int k = 0; k < num_particles; ++k) {
      if (dim > (std::size_t{1} << 40) / model.weights.size())
        throw std::invalid_argument("SystemShape: full space too large");
      dim *= model.weights.size();
    }
    return dim;
  }
};

/// Row-major linearization with particle 1 most significant; this is the
/// file-format contract for dense amplitude order.
inline std::size_t linear_index(const SystemShape& shape, const MultiIndex& index) {
  std::size_t lin = 0;
  const std::size_t d = shape.model.weights.size();
  for (int v : index) lin = lin * d + static_cast<std::size_t>(v);
  return lin;
}

inline MultiIndex multi_index(const SystemShape& shape, std::size_t linear) {
  const std::size_t d = shape.model.weights.size();
  MultiIndex index(shape.num_particles);
  for (int k = shape.num_particles - 1; k >= 0; --k) {
    index[k] = static_cast<int>(linear % d);
    linear /= d;
  }
  return index;
}

/// Componentwise sum of the model weights selected by the multi-index.
inline WeightVec weight_of(const SystemShape& shape, const MultiIndex& index) {
  if (static_cast<int>(index.size()) != shape.num_particles)
    throw std::invalid_argument("weight_of: index length != N");
  WeightVec w(shape.model.cartan_dim, 0);
  for (int v : index) {
    if (v < 0 || v >= shape.model.dim()) throw std::invalid_argument("weight_of: index out of range");
    for (int i = 0; i < shape.model.cartan_dim; ++i) w[i] += shape.model.weights[v][i];
  }
  return w;
}

/// All multi-indices of weight w, in lexicographic order. Empty when the
/// sector is empty.
inline std::vector<MultiIndex> constant_weight_basis(const SystemShape& shape, const WeightVec& w) {
  shape.validate();
  if (static_cast<int>(w.size()) != shape.model.cartan_dim)
    throw std::invalid_argument("constant_weight_basis: weight length != cartan_dim");
  const int n = shape.num_particles;
  const int d = shape.model.dim();
  const int c = shape.model.cartan_dim;

  // suffix min/max of achievable remaining weight, per component
  std::vector<int> wmin(c, INT32_MAX), wmax(c, INT32_MIN);
  for (const auto& a : shape.model.weights)
    for (int i = 0; i < c; ++i) {
      wmin[i] = std::min(wmin[i], a[i]);
      wmax[i] = std::max(wmax[i], a[i]);
    }

  std::vector<MultiIndex> out;
  MultiIndex index(n);
  std::vector<int> rem(w);
  std::function<void(int)> rec = [&](int k) {
    const int left = n - k;
    for (int i = 0; i < c; ++i)
      if (rem[i] < left * wmin[i] || rem[i] > left * wmax[i]) return;
    if (k == n) {
      out.push_back(index);
      return;
    }
    for (int r = 0; r < d; ++r) {
      index[k] = r;
      for (int i = 0; i < c; ++i) rem[i] -= shape.model.weights[r][i];
      rec(k + 1);
      for (int i = 0; i < c; ++i) rem[i] += shape.model.weights[r][i];
    }
  };
  rec(0);
  return out;
}

/// Complex amplitudes over the product basis, stored dense over a declared
/// support: the full space (support_weight absent, amplitudes in row-major
/// linear order) or one constant-weight sector (support_weight present,
/// amplitudes parallel to the lex-ordered sector basis).
///
/// Immutable by convention after construction; all operations on states are
/// pure functions.
struct StateVector {
  SystemShape shape;
  std::optional<WeightVec> support_weight;
  std::vector<MultiIndex> basis;  // sector mode only; empty in full mode
  std::vector<Complex> amplitudes;

  bool sector_mode() const { return support_weight.has_value(); }

  std::size_t support_size() const { return amplitudes.size(); }

  double norm2() const {
    double s = 0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return s;
  }

  bool is_normalized(double tol = 1e-12) const { return std::abs(norm2() - 1.0) <= tol; }

  /// Visits (multi_index, amplitude) over the declared support in
  /// lexicographic index order.
  template <class F>
  void for_each(F&& f) const {
    if (sector_mode()) {
      for (std::size_t i = 0; i < basis.size(); ++i) f(basis[i], amplitudes[i]);
    } else {
      MultiIndex index(shape.num_particles, 0);
      const int d = shape.model.dim();
      for (std::size_t lin = 0; lin < amplitudes.size(); ++lin) {
        f(index, amplitudes[lin]);
        for (int k = shape.num_particles - 1; k >= 0; --k) {
          if (++index[k] < d) break;
          index[k] = 0;
        }
      }
    }
  }

  Complex amplitude(const MultiIndex& index) const {
    if (!sector_mode()) return amplitudes.at(linear_index(shape, index));
    auto it = std::lower_bound(basis.begin(), basis.end(), index);
    if (it == basis.end() || *it != index) return {0.0, 0.0};
    return amplitudes[static_cast<std::size_t>(it - basis.begin())];
  }
};

inline StateVector make_full_state(const SystemShape& shape, std::vector<Complex> amplitudes) {
  shape.validate();
  if (amplitudes.size() != shape.full_dimension())
    throw std::invalid_argument("make_full_state: amplitude count != D^N");
  return StateVector{shape, std::nullopt, {}, std::move(amplitudes)};
}

inline StateVector make_sector_state(const SystemShape& shape, const WeightVec& w,
                                     std::vector<Complex> amplitudes) {
  auto basis = constant_weight_basis(shape, w);
  if (amplitudes.size() != basis.size())
    throw std::invalid_argument("make_sector_state: amplitude count != sector dimension");
  return StateVector{shape, w, std::move(basis), std::move(amplitudes)};
}

namespace detail {

/// Seeded complex standard Gaussian stream. The mapping is fixed as part of
/// the reproducibility contract: mt19937_64(seed); per amplitude draw two
/// uniforms u = (x >> 11 + 0.5) * 2^-53 in (0,1), then
/// amp = sqrt(-log(u1)) * exp(2*pi*i*u2).
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}

  Complex next() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-std::log(u1));
    return {radius * std::cos(2.0 * M_PI * u2), radius * std::sin(2.0 * M_PI * u2)};
  }

 private:
  std::mt19937_64 eng_;
  double uniform() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }
};

}  // namespace detail

/// Samples i.i.d. complex Gaussian amplitudes on the declared support and
/// normalizes. Deterministic per seed (see detail::GaussianStream).
inline StateVector sample_state(const SystemShape& shape, const std::optional<WeightVec>& w,
                                std::uint64_t seed) {
  shape.validate();
  StateVector state;
  state.shape = shape;
  if (w) {
    state.support_weight = *w;
    state.basis = constant_weight_basis(shape, *w);
    if (state.basis.empty()) throw std::invalid_argument("sample_state: empty weight sector");
    state.amplitudes.resize(state.basis.size());
  } else {
    state.amplitudes.resize(shape.full_dimension());
  }
  detail::GaussianStream gauss(seed);
  for (auto& a : state.amplitudes) a = gauss.next();
  double norm = std::sqrt(state.norm2());
  for (auto& a : state.amplitudes) a /= norm;
  return state;
}

/// Orthogonal decomposition into constant-weight components. Returns, per
/// weight w with nonzero mass, the component's squared norm p_w and the
/// renormalized component itself; sum of p_w equals the input squared norm.
inline std::map<WeightVec, std::pair<double, StateVector>> weight_components(
    const StateVector& state) {
  std::map<WeightVec, std::pair<std::vector<MultiIndex>, std::vector<Complex>>> groups;
  state.for_each([&](const MultiIndex& index, Complex a) {
    auto& g = groups[weight_of(state.shape, index)];
    g.first.push_back(index);
    g.second.push_back(a);
  });

  std::map<WeightVec, std::pair<double, StateVector>> out;
  for (auto& [w, g] : groups) {
    double p = 0;
    for (const auto& a : g.second) p += std::norm(a);
    if (p == 0.0) continue;
    const double scale = 1.0 / std::sqrt(p);
    for (auto& a : g.second) a *= scale;
    StateVector component{state.shape, w, std::move(g.first), std::move(g.second)};
    out.emplace(w, std::make_pair(p, std::move(component)));
  }
  return out;
}

}  // namespace cwrdm
