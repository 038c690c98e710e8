#pragma once

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cwrdm/io.hpp"
#include "cwrdm/marginals.hpp"
#include "cwrdm/partitions.hpp"
#include "cwrdm/rdm.hpp"
#include "cwrdm/relations.hpp"
#include "cwrdm/state_space.hpp"

namespace cwrdm::cli {

inline constexpr const char* kVersion = "1.0.0";

// Exit-code contract: 0 pass/consistent, 1 fail/inconsistent,
// 2 vacuous/underdetermined/refusal, 3 usage error, 4 I/O error.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitVacuous = 2;
inline constexpr int kExitUsage = 3;
inline constexpr int kExitIo = 4;

namespace detail {

enum class Units { Doubled, Spin };

struct ModelOpts {
  int spin_two_j = -1;
  bool su3 = false;
  std::string model_file;

  WeightModel build() const {
    const int picked = (spin_two_j >= 0) + su3 + !model_file.empty();
    if (picked != 1)
      throw CLI::ValidationError("model", "choose exactly one of --spin, --su3, --model");
    if (spin_two_j >= 0) return spin_model(spin_two_j);
    if (su3) return su3_fundamental();
    return weight_model_from_json(load_json_file(model_file));
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--spin", spin_two_j, "SU(2) irreducible with doubled spin two_j");
    cmd->add_flag("--su3", su3, "SU(3) fundamental representation");
    cmd->add_option("--model", model_file, "weight model JSON file");
  }
};

inline WeightVec parse_weight(const std::string& text, int cartan_dim, const char* what) {
  WeightVec w;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    w.push_back(std::stoi(item));
  if (static_cast<int>(w.size()) != cartan_dim)
    throw CLI::ValidationError(what, "expected " + std::to_string(cartan_dim) +
                                         " comma-separated integer component(s)");
  return w;
}

inline std::string join_ints(const std::vector<int>& v, const char* sep = ";") {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? sep : "") << v[i];
  return os.str();
}

inline std::string weight_str(const WeightVec& w, Units units) {
  std::ostringstream os;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) os << ";";
    os << (units == Units::Spin ? Rational(w[i], 2).str() : std::to_string(w[i]));
  }
  return os.str();
}

inline std::string b_str(const BVector& b, Units units) {
  std::ostringstream os;
  for (std::size_t r = 0; r < b.values.size(); ++r) {
    if (r) os << ",";
    os << (units == Units::Spin ? (b.values[r] * Rational(1, 2)).str() : b.values[r].str());
  }
  return os.str();
}

inline double env_tolerance(double fallback) {
  if (const char* env = std::getenv("CWRDM_TOLERANCE")) {
    try {
      return std::stod(env);
    } catch (...) {
      // fall through to the built-in default
    }
  }
  return fallback;
}

inline void provenance(std::ostream& os, const std::string& command) {
  os << "# cwrdm " << kVersion << "\n# command: " << command << "\n";
}

/// Distinct achievable sector weights of the N-fold product, ordered.
inline std::set<WeightVec> achievable_weights(const SystemShape& shape) {
  std::set<WeightVec> sums{WeightVec(shape.model.cartan_dim, 0)};
  for (int k = 0; k < shape.num_particles; ++k) {
    std::set<WeightVec> next;
    for (const auto& s : sums)
      for (const auto& alpha : shape.model.weights) {
        WeightVec t(s);
        for (int i = 0; i < shape.model.cartan_dim; ++i) t[i] += alpha[i];
        next.insert(std::move(t));
      }
    sums = std::move(next);
  }
  return sums;
}

/// Mixes two sector samples into one full-support state; the verify
/// command's negative control.
inline StateVector two_sector_state(const SystemShape& shape, const WeightVec& w1,
                                    const WeightVec& w2, std::uint64_t seed) {
  const auto s1 = sample_state(shape, w1, seed);
  const auto s2 = sample_state(shape, w2, seed + 1);
  std::vector<Complex> amps(shape.full_dimension(), Complex{0, 0});
  const double scale = 1.0 / std::sqrt(2.0);
  s1.for_each([&](const MultiIndex& index, Complex a) { amps[linear_index(shape, index)] += scale * a; });
  s2.for_each([&](const MultiIndex& index, Complex a) { amps[linear_index(shape, index)] += scale * a; });
  return make_full_state(shape, std::move(amps));
}

// --- partitions -------------------------------------------------------------

struct PartitionsArgs {
  ModelOpts model;
  int slots = 0;
  std::vector<std::string> targets;
  Units units = Units::Doubled;
  std::string out_file;
};

inline int run_partitions(const PartitionsArgs& args, std::ostream& out) {
  const WeightModel model = args.model.build();
  std::ostringstream os;
  provenance(os, "partitions");
  os << "# model: " << model.label << " D=" << model.dim() << " cartan_dim=" << model.cartan_dim
     << "\n# units: " << (args.units == Units::Spin ? "spin" : "doubled") << "\n";

  bool any_nonempty = false;
  for (const auto& target_text : args.targets) {
    const WeightVec target = parse_weight(target_text, model.cartan_dim, "--target");
    const auto fm = frequency_matrix(model, args.slots, target);
    write_frequency_csv(os, fm);
    if (fm.rows.empty()) {
      os << "# vacuous: no partitions for this target\n";
      continue;
    }
    any_nonempty = true;
    os << "# partitions (" << (args.units == Units::Spin ? "spin" : "doubled") << " units):";
    for (const auto& row : fm.rows) {
      os << " [";
      bool first = true;
      for (int r = model.dim() - 1; r >= 0; --r)
        for (int k = 0; k < row[r]; ++k) {
          os << (first ? "" : ",") << weight_str(model.weights[r], args.units);
          first = false;
        }
      os << "]";
    }
    os << "\n";
    const auto rank = rank_analysis(fm);
    os << "# rank_A=" << rank.rank_a << " rank_A_tilde=" << rank.rank_a_tilde << "\n";
    for (const auto& b : b_vector(model, args.slots, target))
      os << "# b[" << b.component + 1 << "]: " << b_str(b, args.units) << "\n";
  }

  if (!args.out_file.empty()) {
    std::ofstream file(args.out_file);
    if (!file) throw std::runtime_error("cannot write " + args.out_file);
    file << os.str();
  } else {
    out << os.str();
  }
  return any_nonempty ? kExitPass : kExitVacuous;
}

// --- verify -----------------------------------------------------------------

struct VerifyArgs {
  ModelOpts model;
  int n = 0;
  std::string w_text;
  int trials = 100;
  std::uint64_t seed = 0;
  int m_min = 1;
  int m_max = -1;  // default N-1
  double tolerance = 1e-10;
  bool break_weight = false;
  std::string report_file;
};

inline int run_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  if (args.tolerance <= 0) throw CLI::ValidationError("--tolerance", "must be positive");
  const WeightModel model = args.model.build();
  SystemShape shape{model, args.n};
  shape.validate();
  const WeightVec w = parse_weight(args.w_text, model.cartan_dim, "--w");
  if (!sector_nonempty(model, args.n, w)) {
    err << "error: weight sector " << weight_str(w, Units::Doubled) << " is empty for N=" << args.n
        << "\n";
    return kExitVacuous;
  }
  const int m_max = args.m_max < 0 ? args.n - 1 : args.m_max;

  std::optional<WeightVec> w2;
  if (args.break_weight) {
    for (const auto& cand : achievable_weights(shape))
      if (cand != w) {
        w2 = cand;
        break;
      }
    if (!w2) {
      err << "error: --break-weight needs a second achievable sector\n";
      return kExitVacuous;
    }
  }

  std::ostringstream report;
  report << "N,model,w,M,I0,S,component,b,residual,relative,vacuous\n";

  const auto start = std::chrono::steady_clock::now();
  double max_residual = 0;
  long long contexts = 0, vacuous = 0;
  for (int trial = 0; trial < args.trials; ++trial) {
    const std::uint64_t seed = args.seed + static_cast<std::uint64_t>(trial);
    const StateVector state = args.break_weight ? two_sector_state(shape, w, *w2, seed)
                                                : sample_state(shape, w, seed);
    for (const auto& ctx : residual_sweep(state, w, args.m_min, m_max)) {
      ++contexts;
      if (ctx.vacuous) ++vacuous;
      for (int c = 0; c < model.cartan_dim && !ctx.vacuous; ++c)
        max_residual = std::max(max_residual, ctx.absolute[c]);
      if (!args.report_file.empty() && trial == 0) {
        const auto bs = b_vector(model, args.n - ctx.m, ctx.s);
        MultiIndex i0_one(ctx.i0);
        for (auto& v : i0_one) ++v;
        for (int c = 0; c < model.cartan_dim; ++c)
          report << args.n << "," << model.label << "," << weight_str(w, Units::Doubled) << ","
                 << ctx.m << "," << join_ints(i0_one) << "," << weight_str(ctx.s, Units::Doubled)
                 << "," << c + 1 << "," << b_str(bs[c], Units::Doubled).c_str() << ","
                 << std::setprecision(17) << (ctx.vacuous ? 0.0 : ctx.absolute[c]) << ","
                 << (ctx.vacuous ? 0.0 : ctx.relative[c]) << "," << (ctx.vacuous ? 1 : 0) << "\n";
      }
    }
  }
  const auto elapsed =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);

  provenance(out, "verify");
  out << "# model: " << model.label << " D=" << model.dim() << "\n"
      << "# N=" << args.n << " w=" << weight_str(w, Units::Doubled) << " trials=" << args.trials
      << " seed=" << args.seed << " m=" << args.m_min << ".." << m_max << " tolerance="
      << args.tolerance << (args.break_weight ? " break-weight" : "") << "\n"
      << "# contexts=" << contexts << " vacuous=" << vacuous << "\n"
      << "max_residual=" << std::setprecision(17) << max_residual << "\n";
  const bool pass = max_residual <= args.tolerance;
  out << "verdict=" << (pass ? "pass" : "fail") << "\n";
  err << "# runtime_ms=" << elapsed.count() << "\n";

  if (!args.report_file.empty()) {
    std::ofstream file(args.report_file);
    if (!file) throw std::runtime_error("cannot write " + args.report_file);
    file << report.str();
  }
  return pass ? kExitPass : kExitFail;
}

// --- certify ----------------------------------------------------------------

struct CertifyArgs {
  std::string family_file;
  int pivot = 1;
  double tolerance = 1e-6;
  std::string residuals_file;
};

inline int run_certify(const CertifyArgs& args, std::ostream& out) {
  if (args.tolerance <= 0) throw CLI::ValidationError("--tolerance", "must be positive");
  const MarginalFamily family = family_from_json(load_json_file(args.family_file));
  const auto sanity = family_sanity(family);
  const double trivial = trivial_compatibility(family, args.pivot - 1);
  const auto report = constant_weight_certificate(family, args.pivot - 1, args.tolerance);

  provenance(out, "certify");
  out << "# family: " << args.family_file << " pivot=" << args.pivot
      << " tolerance=" << args.tolerance << "\n"
      << "# sanity: herm_err=" << std::setprecision(6) << sanity.max_hermiticity_error
      << " trace_gap=" << sanity.max_trace_gap << " min_eig=" << sanity.min_eigenvalue << "\n"
      << "# trivial_compatibility=" << trivial << "\n";

  out << "verdict: " << to_string(report.verdict);
  if (report.verdict == Verdict::Consistent) out << "(" << join_ints(*report.w0, ",") << ")";
  out << "\n";
  if (report.verdict != Verdict::Underdetermined)
    out << "# spread=" << report.spread << " snap_distance=" << report.snap_distance
        << " achievable=" << (report.achievable ? "yes" : "no") << "\n";

  std::ostringstream csv;
  csv << "pivot,i0,population,candidate,deviation\n";
  for (const auto& row : report.rows) {
    csv << row.pivot + 1 << "," << row.i0 + 1 << "," << std::setprecision(17) << row.population
        << ",";
    if (row.has_candidate)
      for (std::size_t i = 0; i < row.candidate.size(); ++i)
        csv << (i ? ";" : "") << row.candidate[i];
    csv << "," << row.deviation << "\n";
  }
  if (!args.residuals_file.empty()) {
    std::ofstream file(args.residuals_file);
    if (!file) throw std::runtime_error("cannot write " + args.residuals_file);
    file << csv.str();
  } else {
    out << csv.str();
  }

  switch (report.verdict) {
    case Verdict::Consistent: return kExitPass;
    case Verdict::Inconsistent: return kExitFail;
    case Verdict::Underdetermined: return kExitVacuous;
  }
  return kExitUsage;
}

// --- witness ----------------------------------------------------------------

struct WitnessArgs {
  ModelOpts model;
  int n = 0;
  std::string w_text;
  std::string state_file;
  Units units = Units::Doubled;
};

inline int run_witness(const WitnessArgs& args, std::ostream& out, std::ostream& err) {
  const WeightModel model = args.model.build();
  const WeightVec w = parse_weight(args.w_text, model.cartan_dim, "--w");

  provenance(out, "witness");
  out << "# model: " << model.label << " D=" << model.dim() << " N=" << args.n
      << " w=" << weight_str(w, Units::Doubled) << "\n";

  if (args.n < 4) {
    out << "refusal: no obstruction context exists for N=" << args.n
        << "; a context needs M >= 1 traced-complement slots with M+1 <= floor(N/2), which "
           "requires N >= 4 (2- and 3-particle invariant tensors can be perfect)\n";
    return kExitVacuous;
  }
  if (!sector_nonempty(model, args.n, w)) {
    err << "error: weight sector is empty\n";
    return kExitVacuous;
  }

  const auto witness = impossibility_witness(model, args.n, w);
  MultiIndex i0_one(witness.i0);
  for (auto& v : i0_one) ++v;
  out << "M=" << witness.m << "\n"
      << "I0=" << join_ints(i0_one) << "\n"
      << "S=" << weight_str(witness.s, args.units) << "\n"
      << "component=" << witness.component + 1 << "\n"
      << "b=" << b_str(witness.b, args.units) << "\n"
      << "sum_b="
      << (args.units == Units::Spin ? (witness.contradiction_value * Rational(1, 2)).str()
                                    : witness.contradiction_value.str())
      << "\n"
      << "verdict=obstructed\n";

  if (!args.state_file.empty()) {
    const StateVector state = state_from_json(load_json_file(args.state_file));
    const auto deviation = perfect_deviation(state);
    out << "traced,deviation\n";
    for (const auto& entry : deviation.table) {
      std::vector<int> one(entry.traced);
      for (auto& v : one) ++v;
      out << join_ints(one) << "," << std::setprecision(17) << entry.deviation << "\n";
    }
    out << "max_deviation=" << std::setprecision(17) << deviation.max_deviation << "\n";
  }
  return kExitPass;
}

// --- trace-state / sample -----------------------------------------------------

struct TraceArgs {
  std::string state_file;
  std::string trace_text;
  std::string out_file;
};

inline int run_trace_state(const TraceArgs& args, std::ostream& out) {
  const StateVector state = state_from_json(load_json_file(args.state_file));
  std::vector<int> traced;
  std::stringstream ss(args.trace_text);
  std::string item;
  while (std::getline(ss, item, ',')) traced.push_back(std::stoi(item) - 1);
  const auto rdm = partial_trace(state, traced);

  provenance(out, "trace-state");
  out << "# state: " << args.state_file << " traced=" << args.trace_text << "\n"
      << "dim=" << rdm.dim << "\n"
      << std::setprecision(17) << "trace=" << rdm.trace() << "\n"
      << "asymmetry=" << rdm.asymmetry << "\n"
      << "min_eigenvalue=" << rdm.min_eigenvalue() << "\n"
      << "numeric_rank=" << rdm.numeric_rank() << "\n"
      << "deviation_from_maximally_mixed=" << deviation_from_maximally_mixed(rdm) << "\n";
  if (!args.out_file.empty()) save_json_file(args.out_file, to_json(rdm));
  return kExitPass;
}

struct SampleArgs {
  ModelOpts model;
  int n = 0;
  std::string w_text;
  std::uint64_t seed = 0;
  std::string out_file;
};

inline int run_sample(const SampleArgs& args, std::ostream& out) {
  const WeightModel model = args.model.build();
  SystemShape shape{model, args.n};
  std::optional<WeightVec> w;
  if (!args.w_text.empty()) w = parse_weight(args.w_text, model.cartan_dim, "--w");
  const StateVector state = sample_state(shape, w, args.seed);
  const json j = to_json(state);
  if (!args.out_file.empty())
    save_json_file(args.out_file, j);
  else
    out << j.dump(2) << "\n";
  return kExitPass;
}

}  // namespace detail

/// Runs the CLI on natural-order arguments (no program name). Output goes to
/// `out`, diagnostics and runtime metadata to `err`; primary output is
/// byte-identical across identical invocations.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  using namespace detail;
  CLI::App app{"constant-weight subspace toolkit: partitions, RDM relations, marginal "
               "certificates, perfect-tensor witnesses"};
  app.set_help_all_flag("--help-all");
  app.set_version_flag("--version", std::string("cwrdm ") + kVersion);

  PartitionsArgs partitions_args;
  auto* partitions_cmd =
      app.add_subcommand("partitions", "enumerate partitions, frequency matrix, b-vector, ranks");
  partitions_args.model.attach(partitions_cmd);
  partitions_cmd->add_option("--slots", partitions_args.slots, "number of summed entries")
      ->required();
  partitions_cmd
      ->add_option("--target", partitions_args.targets,
                   "target weight (doubled units, comma-separated components); repeatable")
      ->required();
  partitions_cmd->add_option("--out", partitions_args.out_file, "write report to file");

  VerifyArgs verify_args;
  verify_args.tolerance = env_tolerance(1e-10);
  auto* verify_cmd =
      app.add_subcommand("verify", "sample sector states and sweep the diagonal RDM relations");
  verify_args.model.attach(verify_cmd);
  verify_cmd->add_option("--n", verify_args.n, "number of particles")->required();
  verify_cmd->add_option("--w", verify_args.w_text, "sector weight (doubled units)")->required();
  verify_cmd->add_option("--trials", verify_args.trials, "number of sampled states");
  verify_cmd->add_option("--seed", verify_args.seed, "base RNG seed");
  verify_cmd->add_option("--m-min", verify_args.m_min, "smallest M in the sweep");
  verify_cmd->add_option("--m-max", verify_args.m_max, "largest M in the sweep (default N-1)");
  verify_cmd->add_option("--tolerance", verify_args.tolerance, "residual tolerance");
  verify_cmd->add_flag("--break-weight", verify_args.break_weight,
                       "negative control: inject a second weight sector");
  verify_cmd->add_option("--report", verify_args.report_file, "per-context CSV (first trial)");

  CertifyArgs certify_args;
  certify_args.tolerance = env_tolerance(1e-6);
  auto* certify_cmd =
      app.add_subcommand("certify", "constant-weight liftability certificate for two-body data");
  certify_cmd->add_option("--family", certify_args.family_file, "marginal family JSON")->required();
  certify_cmd->add_option("--pivot", certify_args.pivot, "pivot site (1-based)")->required();
  certify_cmd->add_option("--tolerance", certify_args.tolerance, "candidate agreement tolerance");
  certify_cmd->add_option("--residuals", certify_args.residuals_file, "per-index CSV output file");

  WitnessArgs witness_args;
  auto* witness_cmd =
      app.add_subcommand("witness", "perfect-tensor impossibility witness for a weight sector");
  witness_args.model.attach(witness_cmd);
  witness_cmd->add_option("--n", witness_args.n, "number of particles")->required();
  witness_cmd->add_option("--w", witness_args.w_text, "sector weight (doubled units)")->required();
  witness_cmd->add_option("--state", witness_args.state_file,
                          "also print the marginal deviation table of this state");

  TraceArgs trace_args;
  auto* trace_cmd = app.add_subcommand("trace-state", "partial trace of a JSON state");
  trace_cmd->add_option("--state", trace_args.state_file, "state JSON")->required();
  trace_cmd->add_option("--trace", trace_args.trace_text, "traced positions, 1-based, comma-separated")
      ->required();
  trace_cmd->add_option("--out", trace_args.out_file, "write RDM JSON to file");

  SampleArgs sample_args;
  auto* sample_cmd = app.add_subcommand("sample", "emit a seeded random state as JSON");
  sample_args.model.attach(sample_cmd);
  sample_cmd->add_option("--n", sample_args.n, "number of particles")->required();
  sample_cmd->add_option("--w", sample_args.w_text, "restrict to this weight sector");
  sample_cmd->add_option("--seed", sample_args.seed, "RNG seed");
  sample_cmd->add_option("--out", sample_args.out_file, "write state JSON to file");

  const std::map<std::string, Units*> units_targets{{"partitions", &partitions_args.units},
                                                    {"witness", &witness_args.units}};
  for (const auto& entry : units_targets) {
    Units* units = entry.second;
    app.get_subcommand(entry.first)
        ->add_option_function<std::string>(
            "--units",
            [units](const std::string& v) { *units = v == "spin" ? Units::Spin : Units::Doubled; },
            "display units for weights and b (doubled|spin)")
        ->check(CLI::IsMember({"doubled", "spin"}));
  }

  app.require_subcommand(1);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (partitions_cmd->parsed()) return run_partitions(partitions_args, out);
    if (verify_cmd->parsed()) return run_verify(verify_args, out, err);
    if (certify_cmd->parsed()) return run_certify(certify_args, out);
    if (witness_cmd->parsed()) return run_witness(witness_args, out, err);
    if (trace_cmd->parsed()) return run_trace_state(trace_args, out);
    if (sample_cmd->parsed()) return run_sample(sample_args, out);
  } catch (const CLI::ValidationError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "input error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::runtime_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace cwrdm::cli
