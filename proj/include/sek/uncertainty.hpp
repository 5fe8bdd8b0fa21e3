#pragma once

// Numerical checks of entropic uncertainty relations with quantum side
// information, and a seeded randomized suite that audits all of them.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sek/entropy.hpp"
#include "sek/errors.hpp"
#include "sek/io.hpp"
#include "sek/measurement.hpp"
#include "sek/random.hpp"
#include "sek/state.hpp"

namespace sek {

enum class RelationId { classical, child, mother, maassen_uffink };

inline std::string to_string(RelationId r) {
  switch (r) {
    case RelationId::classical: return "class";
    case RelationId::child: return "child";
    case RelationId::mother: return "mother";
    case RelationId::maassen_uffink: return "maassen_uffink";
  }
  return "unknown";
}

inline RelationId relation_from_string(const std::string& s) {
  if (s == "class") return RelationId::classical;
  if (s == "child") return RelationId::child;
  if (s == "mother") return RelationId::mother;
  if (s == "mu" || s == "maassen_uffink") return RelationId::maassen_uffink;
  throw ArgumentError("unknown relation '" + s + "'");
}

/// Default tolerance on the slack of each relation.
inline double default_tolerance(RelationId r) {
  switch (r) {
    case RelationId::mother: return 2e-5;
    case RelationId::maassen_uffink: return 1e-9;
    default: return 1e-6;
  }
}

struct InstanceDescriptor {
  std::uint64_t seed = 0;
  std::int64_t trial = -1;  // -1 for hand-built instances
  Dims dims;
  std::string povm_x, povm_z;
  double epsilon = 0.0;
};

struct RelationReport {
  RelationId relation = RelationId::child;
  double lhs = 0.0;
  double rhs_q = 0.0;
  double slack = 0.0;
  double epsilon = 0.0;
  double tolerance = 0.0;
  InstanceDescriptor instance;

  bool passed() const { return slack >= -tolerance; }
};

namespace detail {

inline void require_normalized(const MultipartiteState& s, const char* what) {
  if (std::abs(s.trace() - 1.0) > 1e-8)
    throw ArgumentError(std::string(what) + ": state must be normalized");
}

inline void require_labels(const MultipartiteState& s, const Labels& labels,
                           const char* what) {
  if (s.labels().size() != labels.size())
    throw ArgumentError(std::string(what) + ": expected " +
                        std::to_string(labels.size()) + " subsystems");
  for (const auto& l : labels) (void)s.index_of(l);
}

inline RelationReport make_report(RelationId id, double lhs, double q, double eps,
                                  const Povm& x, const Povm& z, const Dims& dims) {
  RelationReport r;
  r.relation = id;
  r.lhs = lhs;
  r.rhs_q = q;
  r.slack = lhs - q;
  r.epsilon = eps;
  r.tolerance = default_tolerance(id);
  r.instance.dims = dims;
  r.instance.povm_x = x.name();
  r.instance.povm_z = z.name();
  r.instance.epsilon = eps;
  return r;
}

}  // namespace detail

/// H(X|B) + H(Z|C) >= q on a state over systems named A, B, C.
inline RelationReport check_child(const MultipartiteState& s, const Povm& x,
                                  const Povm& z) {
  detail::require_labels(s, {"A", "B", "C"}, "check_child");
  detail::require_normalized(s, "check_child");
  const MultipartiteState xb = measure_to_cq(s, x, "A", {"B"}, "X").to_state();
  const MultipartiteState zc = measure_to_cq(s, z, "A", {"C"}, "Z").to_state();
  const double lhs = von_neumann(xb, "X", {"B"}) + von_neumann(zc, "Z", {"C"});
  return detail::make_report(RelationId::child, lhs, overlap(x, z).q, 0.0, x, z,
                             s.dims());
}

/// H_min^eps(X|B) + H_max^eps(Z|C) >= q.
inline RelationReport check_mother(const MultipartiteState& s, const Povm& x,
                                   const Povm& z, SmoothingParam eps,
                                   const EntropyOptions& options = {}) {
  detail::require_labels(s, {"A", "B", "C"}, "check_mother");
  detail::require_normalized(s, "check_mother");
  const MultipartiteState xb = measure_to_cq(s, x, "A", {"B"}, "X").to_state();
  const MultipartiteState zc = measure_to_cq(s, z, "A", {"C"}, "Z").to_state();
  const double lhs = h_min_smooth(xb, "X", {"B"}, eps, options).value +
                     h_max_smooth(zc, "Z", {"C"}, eps, options).value;
  return detail::make_report(RelationId::mother, lhs, overlap(x, z).q, eps.value(),
                             x, z, s.dims());
}

/// H(X|S) + H(Z|S) >= q for a state on A and a classical register S.  The
/// operator must be block diagonal in the computational basis of S.
inline RelationReport check_class(const MultipartiteState& s, const Povm& x,
                                  const Povm& z) {
  detail::require_labels(s, {"A", "S"}, "check_class");
  detail::require_normalized(s, "check_class");
  const MultipartiteState as = marginal(s, {"A", "S"});
  const long ds = as.dims()[1];
  double off = 0.0;
  for (long i = 0; i < as.dim(); ++i)
    for (long j = 0; j < as.dim(); ++j)
      if (i % ds != j % ds) off = std::max(off, std::abs(as.op()(i, j)));
  if (off > 1e-10)
    throw ArgumentError("check_class: register S is not classical (coherence " +
                        std::to_string(off) + ")");
  const MultipartiteState xs = measure_to_cq(s, x, "A", {"S"}, "X").to_state();
  const MultipartiteState zs = measure_to_cq(s, z, "A", {"S"}, "Z").to_state();
  const double lhs = von_neumann(xs, "X", {"S"}) + von_neumann(zs, "Z", {"S"});
  return detail::make_report(RelationId::classical, lhs, overlap(x, z).q, 0.0, x, z,
                             s.dims());
}

/// H_inf(X) + H_{1/2}(Z) >= q for a single-system state.
inline RelationReport check_maassen_uffink(const MultipartiteState& rho, const Povm& x,
                                           const Povm& z) {
  if (rho.dims().size() != 1)
    throw ArgumentError("check_maassen_uffink: expected a single-system state");
  detail::require_normalized(rho, "check_maassen_uffink");
  const double lhs = renyi_inf(born_probabilities(rho.op(), x)) +
                     renyi_half(born_probabilities(rho.op(), z));
  return detail::make_report(RelationId::maassen_uffink, lhs, overlap(x, z).q, 0.0, x,
                             z, rho.dims());
}

// ---------------------------------------------------------------------------
// Randomized suite

struct SuiteConfig {
  std::vector<RelationId> relations{RelationId::classical, RelationId::child,
                                    RelationId::mother, RelationId::maassen_uffink};
  int trials = 10;
  Dims dims{2, 2, 2};  // A, B, C; class uses (A, B) as (A, S)
  std::vector<double> eps_list{0.0};
  std::uint64_t seed = 1;
  bool include_tight = true;  // prepend a known tight instance where dims allow
  double tolerance_scale = 1.0;  // >= 1; multiplies the per-relation defaults
  std::string replay_dir;      // where a violating instance is written
  std::string timestamp;       // filled with the current UTC time when empty
};

struct FailureRecord {
  InstanceDescriptor instance;
  std::string message;
};

struct RelationSummary {
  RelationId relation = RelationId::child;
  double tolerance = 0.0;
  int trials = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  double mean_slack = 0.0;
  int tight = 0;
  std::vector<InstanceDescriptor> tight_instances;
  std::vector<FailureRecord> failures;  // numerical failures; the suite goes on
};

struct SuiteReport {
  SuiteConfig config;
  std::vector<RelationSummary> relations;
  bool violated = false;
  std::optional<RelationReport> violation;
  std::string replay_path;

  bool ok() const {
    if (violated) return false;
    for (const auto& r : relations)
      if (!r.failures.empty()) return false;
    return true;
  }
};

/// A relation instance together with everything needed to recompute it.
struct Instance {
  MultipartiteState state;
  Povm x, z;
  double epsilon = 0.0;
  InstanceDescriptor descriptor;
};

namespace detail {

inline constexpr double kTightThreshold = 1e-4;

inline Povm bb84_x() { return computational_povm(2); }
inline Povm bb84_z() { return hadamard_povm(); }

inline MultipartiteState random_cq(long da, long ds, Rng& rng) {
  std::vector<double> p(static_cast<std::size_t>(ds));
  double total = 0.0;
  for (auto& v : p) total += (v = rng.uniform() + 1e-3);
  Matrix op = Matrix::Zero(da * ds, da * ds);
  for (long s = 0; s < ds; ++s) {
    const long rank = 1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(da)));
    const Matrix rho = random_state({da}, rank, rng).op();
    for (long i = 0; i < da; ++i)
      for (long j = 0; j < da; ++j) op(i * ds + s, j * ds + s) = p[s] / total * rho(i, j);
  }
  return {op, {da, ds}, {"A", "S"}};
}

/// Even trials use random bases, odd trials random three-outcome POVMs.
inline std::pair<Povm, Povm> random_pair(long da, std::int64_t trial, Rng& rng) {
  if (trial % 2 == 0)
    return {random_projective_povm(da, rng), random_projective_povm(da, rng)};
  return {random_povm(da, 3, rng), random_povm(da, 3, rng)};
}

inline std::optional<Instance> tight_instance(RelationId id, const Dims& dims) {
  if (dims[0] != 2) return std::nullopt;
  Vector phi = Vector::Zero(4);
  phi(0) = phi(3) = M_SQRT1_2;
  InstanceDescriptor d;
  d.povm_x = "computational";
  d.povm_z = "hadamard";
  switch (id) {
    case RelationId::child:
    case RelationId::mother: {
      // maximally entangled AB, trivial C
      const MultipartiteState ab(projector(phi), {2, 2}, {"A", "B"});
      const MultipartiteState c(basis_ket(1, 0) * basis_ket(1, 0).adjoint(), {1}, {"C"});
      MultipartiteState s = tensor(ab, c);
      d.dims = s.dims();
      return Instance{std::move(s), bb84_x(), bb84_z(), 0.0, d};
    }
    case RelationId::classical: {
      // which of |0>, |+> was prepared, recorded in S
      Matrix op = Matrix::Zero(4, 4);
      op(0, 0) = 0.5;
      Vector plus(2);
      plus << M_SQRT1_2, M_SQRT1_2;
      const Matrix pp = 0.5 * projector(plus);
      for (long i = 0; i < 2; ++i)
        for (long j = 0; j < 2; ++j) op(i * 2 + 1, j * 2 + 1) = pp(i, j);
      MultipartiteState s(op, {2, 2}, {"A", "S"});
      d.dims = s.dims();
      return Instance{std::move(s), bb84_x(), bb84_z(), 0.0, d};
    }
    case RelationId::maassen_uffink: {
      MultipartiteState s(projector(basis_ket(2, 0)), {2}, {"A"});
      d.dims = s.dims();
      return Instance{std::move(s), bb84_x(), bb84_z(), 0.0, d};
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Deterministic random instance for (relation, seed, trial).
inline Instance random_instance(RelationId id, const SuiteConfig& cfg, std::int64_t trial) {
  Rng rng = Rng::substream(cfg.seed ^ (static_cast<std::uint64_t>(id) << 56),
                           static_cast<std::uint64_t>(trial));
  const long da = cfg.dims[0];
  InstanceDescriptor d;
  d.seed = cfg.seed;
  d.trial = trial;
  auto [x, z] = detail::random_pair(da, trial, rng);
  d.povm_x = x.name();
  d.povm_z = z.name();
  double eps = 0.0;
  std::optional<MultipartiteState> s;
  switch (id) {
    case RelationId::child:
    case RelationId::mother: {
      const Dims dims{da, cfg.dims[1], cfg.dims[2]};
      const long total = detail::product(dims);
      const long rank = 1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(total)));
      s = random_state(dims, rank, rng, {"A", "B", "C"});
      if (id == RelationId::mother)
        eps = cfg.eps_list[static_cast<std::size_t>(trial) % cfg.eps_list.size()];
      break;
    }
    case RelationId::classical:
      s = detail::random_cq(da, cfg.dims[1], rng);
      break;
    case RelationId::maassen_uffink: {
      const long rank = 1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(da)));
      s = random_state({da}, rank, rng, {"A"});
      break;
    }
  }
  d.dims = s->dims();
  d.epsilon = eps;
  return {std::move(*s), std::move(x), std::move(z), eps, d};
}

inline RelationReport run_check(RelationId id, const Instance& inst,
                                const EntropyOptions& options = {}) {
  RelationReport r = [&] {
    switch (id) {
      case RelationId::classical: return check_class(inst.state, inst.x, inst.z);
      case RelationId::child: return check_child(inst.state, inst.x, inst.z);
      case RelationId::mother:
        return check_mother(inst.state, inst.x, inst.z, inst.epsilon, options);
      case RelationId::maassen_uffink:
        return check_maassen_uffink(inst.state, inst.x, inst.z);
    }
    throw ArgumentError("unknown relation");
  }();
  r.instance = inst.descriptor;
  return r;
}

inline io::Json descriptor_to_json(const InstanceDescriptor& d) {
  io::Json j;
  j["seed"] = d.seed;
  j["trial"] = d.trial;
  j["dims"] = d.dims;
  j["povm_x"] = d.povm_x;
  j["povm_z"] = d.povm_z;
  j["epsilon"] = d.epsilon;
  return j;
}

inline io::Json replay_to_json(const RelationReport& r, const Instance& inst) {
  io::Json j;
  j["relation"] = to_string(r.relation);
  j["instance"] = descriptor_to_json(r.instance);
  j["lhs"] = r.lhs;
  j["q"] = r.rhs_q;
  j["slack"] = r.slack;
  j["tolerance"] = r.tolerance;
  j["state"] = io::state_to_json(inst.state);
  j["povm_x"] = io::povm_to_json(inst.x);
  j["povm_z"] = io::povm_to_json(inst.z);
  return j;
}

/// Rebuilds the instance stored in a replay file.
inline Instance replay_from_json(const io::Json& j) {
  try {
    Instance inst{io::state_from_json(j.at("state")), io::povm_from_json(j.at("povm_x")),
                  io::povm_from_json(j.at("povm_z")), 0.0, {}};
    const auto& d = j.at("instance");
    inst.descriptor.seed = d.at("seed").get<std::uint64_t>();
    inst.descriptor.trial = d.at("trial").get<std::int64_t>();
    inst.descriptor.dims = d.at("dims").get<Dims>();
    inst.descriptor.povm_x = d.at("povm_x").get<std::string>();
    inst.descriptor.povm_z = d.at("povm_z").get<std::string>();
    inst.descriptor.epsilon = inst.epsilon = d.at("epsilon").get<double>();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("replay file: ") + e.what());
  }
}

namespace detail {

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void validate(const SuiteConfig& cfg) {
  if (cfg.trials < 0) throw ArgumentError("trials must be nonnegative");
  if (cfg.dims.size() != 3) throw ArgumentError("dims must list three dimensions");
  for (long d : cfg.dims)
    if (d < 1) throw ArgumentError("dims must be positive");
  if (cfg.dims[0] < 2) throw ArgumentError("the measured system needs dimension >= 2");
  if (product(cfg.dims) > 64) throw CapacityError("suite dims exceed total dimension 64");
  if (cfg.eps_list.empty()) throw ArgumentError("eps list is empty");
  for (double e : cfg.eps_list)
    if (!(e >= 0.0 && e <= 0.3)) throw ArgumentError("eps must lie in [0, 0.3]");
  if (!(cfg.tolerance_scale >= 1.0))
    throw ArgumentError("tolerances can only be loosened (scale >= 1)");
}

}  // namespace detail

/// Runs every selected relation on `trials` seeded instances.  Numerical
/// failures are recorded and skipped; a slack below tolerance stops the
/// suite and, with a replay directory, writes the instance to disk.
inline SuiteReport randomized_suite(SuiteConfig cfg, const EntropyOptions& options = {}) {
  detail::validate(cfg);
  if (cfg.timestamp.empty()) cfg.timestamp = detail::utc_now();
  SuiteReport report;
  report.config = cfg;
  for (RelationId id : cfg.relations) {
    RelationSummary sum;
    sum.relation = id;
    sum.tolerance = default_tolerance(id) * cfg.tolerance_scale;
    double total = 0.0;
    std::vector<Instance> instances;
    auto evaluate = [&](const Instance& inst) -> bool {
      RelationReport r;
      try {
        r = run_check(id, inst, options);
      } catch (const NumericalFailure& e) {
        sum.failures.push_back({inst.descriptor, e.what()});
        return true;
      }
      r.tolerance = sum.tolerance;
      ++sum.trials;
      total += r.slack;
      sum.min_slack = std::min(sum.min_slack, r.slack);
      if (std::abs(r.slack) <= detail::kTightThreshold) {
        ++sum.tight;
        sum.tight_instances.push_back(r.instance);
      }
      if (r.passed()) return true;
      report.violated = true;
      report.violation = r;
      if (!cfg.replay_dir.empty()) {
        std::filesystem::create_directories(cfg.replay_dir);
        report.replay_path = (std::filesystem::path(cfg.replay_dir) /
                              ("violation_" + to_string(id) + "_seed" +
                               std::to_string(cfg.seed) + "_trial" +
                               std::to_string(inst.descriptor.trial) + ".json"))
                                 .string();
        io::write_json_file(report.replay_path, replay_to_json(r, inst));
      }
      return false;
    };
    bool go = true;
    if (cfg.include_tight)
      if (auto tight = detail::tight_instance(id, cfg.dims)) {
        tight->descriptor.seed = cfg.seed;
        go = evaluate(*tight);
      }
    for (int t = 0; go && t < cfg.trials; ++t) go = evaluate(random_instance(id, cfg, t));
    sum.mean_slack = sum.trials > 0 ? total / sum.trials : 0.0;
    report.relations.push_back(std::move(sum));
    if (!go) break;
  }
  return report;
}

inline io::Json suite_to_json(const SuiteReport& r) {
  io::Json j;
  j["timestamp"] = r.config.timestamp;
  j["seed"] = r.config.seed;
  j["trials"] = r.config.trials;
  j["dims"] = r.config.dims;
  j["eps"] = r.config.eps_list;
  j["rng"] = Rng::kAlgorithm;
  io::Json rels = io::Json::object();
  for (const auto& s : r.relations) {
    io::Json e;
    e["trials"] = s.trials;
    e["tolerance"] = s.tolerance;
    e["min_slack"] = s.trials > 0 ? io::Json(s.min_slack) : io::Json(nullptr);
    e["mean_slack"] = s.trials > 0 ? io::Json(s.mean_slack) : io::Json(nullptr);
    e["tight"] = s.tight;
    io::Json tight = io::Json::array();
    for (const auto& d : s.tight_instances) tight.push_back(descriptor_to_json(d));
    e["tight_instances"] = std::move(tight);
    io::Json fails = io::Json::array();
    for (const auto& f : s.failures) {
      io::Json fj = descriptor_to_json(f.instance);
      fj["message"] = f.message;
      fails.push_back(std::move(fj));
    }
    e["failures"] = std::move(fails);
    rels[to_string(s.relation)] = std::move(e);
  }
  j["relations"] = std::move(rels);
  j["violated"] = r.violated;
  if (r.violation) {
    io::Json v = descriptor_to_json(r.violation->instance);
    v["relation"] = to_string(r.violation->relation);
    v["slack"] = r.violation->slack;
    v["replay_file"] = r.replay_path;
    j["violation"] = std::move(v);
  }
  return j;
}

}  // namespace sek
