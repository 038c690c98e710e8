#pragma once

#include <fstream>
#include <algorithm>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cwrdm/marginals.hpp"
#include "cwrdm/partitions.hpp"
#include "cwrdm/rdm.hpp"
#include "cwrdm/state_space.hpp"
#include "cwrdm/weight_model.hpp"

namespace cwrdm {

using nlohmann::json;

// --- weight model ---------------------------------------------------------

inline json to_json(const WeightModel& model) {
  return json{{"cartan_dim", model.cartan_dim}, {"weights", model.weights}, {"label", model.label}};
}

inline WeightModel weight_model_from_json(const json& j) {
  WeightModel model;
  model.cartan_dim = j.at("cartan_dim").get<int>();
  model.weights = j.at("weights").get<std::vector<WeightVec>>();
  model.label = j.value("label", std::string{});
  model.validate();
  return model;
}

// --- states ----------------------------------------------------------------
// Amplitude indices are 1-based on disk, dense over the declared support.

inline json to_json(const StateVector& state) {
  json amps = json::array();
  state.for_each([&](const MultiIndex& index, Complex a) {
    MultiIndex one_based(index);
    for (auto& v : one_based) ++v;
    amps.push_back(json{{"index", one_based}, {"re", a.real()}, {"im", a.imag()}});
  });
  json j{{"model", to_json(state.shape.model)},
         {"N", state.shape.num_particles},
         {"amplitudes", std::move(amps)}};
  if (state.support_weight)
    j["support_weight"] = *state.support_weight;
  else
    j["support_weight"] = nullptr;
  return j;
}

inline StateVector state_from_json(const json& j) {
  SystemShape shape;
  shape.model = weight_model_from_json(j.at("model"));
  shape.num_particles = j.at("N").get<int>();
  shape.validate();

  auto read_index = [&](const json& entry) {
    MultiIndex index = entry.at("index").get<MultiIndex>();
    if (static_cast<int>(index.size()) != shape.num_particles)
      throw std::invalid_argument("state: index length != N");
    for (auto& v : index) {
      if (v < 1 || v > shape.model.dim()) throw std::invalid_argument("state: index out of range");
      --v;
    }
    return index;
  };

  const json& sw = j.at("support_weight");
  if (sw.is_null()) {
    std::vector<Complex> amps(shape.full_dimension(), Complex{0, 0});
    for (const auto& entry : j.at("amplitudes"))
      amps[linear_index(shape, read_index(entry))] =
          Complex{entry.at("re").get<double>(), entry.at("im").get<double>()};
    return make_full_state(shape, std::move(amps));
  }

  const WeightVec w = sw.get<WeightVec>();
  auto basis = constant_weight_basis(shape, w);
  std::vector<Complex> amps(basis.size(), Complex{0, 0});
  for (const auto& entry : j.at("amplitudes")) {
    const MultiIndex index = read_index(entry);
    const Complex a{entry.at("re").get<double>(), entry.at("im").get<double>()};
    auto it = std::lower_bound(basis.begin(), basis.end(), index);
    if (it == basis.end() || *it != index) {
      if (a != Complex{0, 0})
        throw std::invalid_argument("state: nonzero amplitude off the declared weight sector");
      continue;
    }
    amps[static_cast<std::size_t>(it - basis.begin())] = a;
  }
  return StateVector{shape, w, std::move(basis), std::move(amps)};
}

// --- reduced density matrices ----------------------------------------------

inline json to_json(const ReducedDensity& rdm) {
  std::vector<int> kept_one_based(rdm.kept);
  for (auto& p : kept_one_based) ++p;
  json matrix = json::array();
  for (const auto& v : rdm.entries) matrix.push_back(json::array({v.real(), v.imag()}));
  return json{{"model", to_json(rdm.shape.model)},
              {"N", rdm.shape.num_particles},
              {"kept", kept_one_based},
              {"matrix", std::move(matrix)}};
}

// --- marginal families -------------------------------------------------------

inline json to_json(const MarginalFamily& family) {
  json pairs = json::array();
  for (const auto& [key, m] : family.entries) {
    json matrix = json::array();
    for (const auto& v : m) matrix.push_back(json::array({v.real(), v.imag()}));
    pairs.push_back(json{{"p", key.first + 1}, {"q", key.second + 1}, {"matrix", std::move(matrix)}});
  }
  return json{{"model", to_json(family.shape.model)},
              {"N", family.shape.num_particles},
              {"pairs", std::move(pairs)}};
}

inline MarginalFamily family_from_json(const json& j) {
  MarginalFamily family;
  family.shape.model = weight_model_from_json(j.at("model"));
  family.shape.num_particles = j.at("N").get<int>();
  family.shape.validate();
  const std::size_t dim = family.pair_dim();
  for (const auto& entry : j.at("pairs")) {
    int p = entry.at("p").get<int>() - 1;
    int q = entry.at("q").get<int>() - 1;
    if (p == q || p < 0 || q < 0 || p >= family.shape.num_particles ||
        q >= family.shape.num_particles)
      throw std::invalid_argument("family: bad pair");
    const auto& matrix = entry.at("matrix");
    if (matrix.size() != dim * dim) throw std::invalid_argument("family: matrix size != D^2 x D^2");
    std::vector<Complex> m;
    m.reserve(dim * dim);
    for (const auto& v : matrix) m.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    if (p > q) {
      // stored key is (min, max) with joint index order (i_min, i_max)
      const int d = family.shape.model.dim();
      std::vector<Complex> swapped(m.size());
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          for (int ap = 0; ap < d; ++ap)
            for (int bp = 0; bp < d; ++bp)
              swapped[(static_cast<std::size_t>(b) * d + a) * dim + (static_cast<std::size_t>(bp) * d + ap)] =
                  m[(static_cast<std::size_t>(a) * d + b) * dim + (static_cast<std::size_t>(ap) * d + bp)];
      m = std::move(swapped);
      std::swap(p, q);
    }
    family.entries[{p, q}] = std::move(m);
  }
  return family;
}

// --- CSV ---------------------------------------------------------------------

/// Frequency-matrix CSV: a comment line recording (D, slots, target), a
/// header row n_1,...,n_D, one data row per partition in canonical order.
inline void write_frequency_csv(std::ostream& os, const FrequencyMatrix& fm) {
  os << "# D=" << fm.model.dim() << " slots=" << fm.slots << " target=";
  for (std::size_t i = 0; i < fm.target.size(); ++i) os << (i ? ";" : "") << fm.target[i];
  os << "\n";
  for (int r = 0; r < fm.model.dim(); ++r) os << (r ? "," : "") << "n_" << r + 1;
  os << "\n";
  for (const auto& row : fm.rows) {
    for (std::size_t r = 0; r < row.size(); ++r) os << (r ? "," : "") << row[r];
    os << "\n";
  }
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

inline void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace cwrdm
