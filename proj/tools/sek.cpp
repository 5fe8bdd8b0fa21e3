// Command-line front end: entropies of state files, overlaps of POVM files,
// randomized relation audits and QKD key-length calculations.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sek/sek.hpp"

namespace {

enum Exit { kOk = 0, kInputError = 2, kNumericalFailure = 3, kViolation = 4 };

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

struct EntropyArgs {
  std::string file, target = "A", kind = "min", dump;
  std::vector<std::string> condition;
  double eps = 0.0;
};

int run_entropy(const EntropyArgs& a) {
  const sek::MultipartiteState s = sek::io::read_state_file(a.file);
  sek::Labels condition;
  for (const auto& c : a.condition)
    for (auto& part : split_csv(c)) condition.push_back(part);
  sek::EntropyOptions options;
  options.solver.dump_path = a.dump;
  double value = 0.0, gap = 0.0;
  if (a.kind == "vn") {
    if (a.eps != 0.0) throw sek::ArgumentError("--eps applies to min and max only");
    value = sek::von_neumann(s, a.target, condition);
  } else {
    const sek::EntropyResult r =
        a.kind == "min" ? sek::h_min_smooth(s, a.target, condition, a.eps, options)
                        : sek::h_max_smooth(s, a.target, condition, a.eps, options);
    value = r.value;
    gap = r.gap;
  }
  sek::io::Json j;
  j["kind"] = a.kind;
  j["eps"] = a.eps;
  j["value_bits"] = value;
  j["gap"] = gap;
  std::cout << sek::io::dump(j);
  return kOk;
}

int run_overlap(const std::string& fx, const std::string& fz) {
  const sek::Povm x = sek::io::read_povm_file(fx);
  const sek::Povm z = sek::io::read_povm_file(fz);
  if (x.dim() != z.dim())
    throw sek::ArgumentError("POVM dimensions differ (" + std::to_string(x.dim()) +
                             " vs " + std::to_string(z.dim()) + ")");
  const sek::OverlapResult r = sek::overlap(x, z);
  sek::io::Json j;
  j["c"] = r.c;
  j["q_bits"] = r.q;
  j["argmax"] = {r.argmax.first, r.argmax.second};
  std::cout << sek::io::dump(j);
  return kOk;
}

struct CheckArgs {
  std::string relation = "child", dims = "2,2,2", eps = "0", report = "check_report.json";
  std::string replay_dir = ".";
  int trials = 10;
  std::uint64_t seed = 1;
  double tolerance = -1.0;
  bool no_tight = false;
};

int run_check(const CheckArgs& a) {
  sek::SuiteConfig cfg;
  const sek::RelationId id = sek::relation_from_string(a.relation);
  cfg.relations = {id};
  cfg.trials = a.trials;
  cfg.seed = a.seed;
  cfg.include_tight = !a.no_tight;
  cfg.replay_dir = a.replay_dir;
  cfg.dims.clear();
  for (const auto& d : split_csv(a.dims)) cfg.dims.push_back(std::stol(d));
  cfg.eps_list.clear();
  for (const auto& e : split_csv(a.eps)) cfg.eps_list.push_back(std::stod(e));
  if (a.tolerance >= 0.0) {
    const double def = sek::default_tolerance(id);
    if (a.tolerance < def)
      throw sek::ArgumentError("--tolerance may only loosen the default of " +
                               std::to_string(def));
    cfg.tolerance_scale = a.tolerance / def;
  }
  const sek::SuiteReport r = sek::randomized_suite(cfg);
  sek::io::write_json_file(a.report, sek::suite_to_json(r));

  const sek::RelationSummary& s = r.relations.front();
  std::printf("relation=%s trials=%d min_slack=%.6g mean_slack=%.6g tight=%d failures=%zu %s\n",
              sek::to_string(id).c_str(), s.trials, s.min_slack, s.mean_slack, s.tight,
              s.failures.size(),
              r.violated ? "VIOLATION" : (s.failures.empty() ? "PASS" : "NUMERICAL-FAILURE"));
  if (r.violated) {
    std::cerr << "slack " << r.violation->slack << " below tolerance";
    if (!r.replay_path.empty()) std::cerr << "; instance written to " << r.replay_path;
    std::cerr << "\n";
    return kViolation;
  }
  for (const auto& f : s.failures)
    std::cerr << "trial " << f.instance.trial << ": " << f.message << "\n";
  return s.failures.empty() ? kOk : kNumericalFailure;
}

struct QkdArgs {
  std::string mode;
  double q = 1.0, delta = 0.0, delta_min = 0.0, delta_max = 0.5, eps = 0.01;
  double noise = 0.0, sample_fraction = 0.1;
  int steps = 51;
  std::int64_t n = 10000;
  std::uint64_t seed = 1;
};

int run_qkd(const QkdArgs& a) {
  if (a.mode == "rate-curve") {
    std::cout << sek::io::rate_curve_csv(
        sek::qkd::rate_curve(a.q, a.delta_min, a.delta_max, a.steps));
  } else if (a.mode == "key-length") {
    const sek::qkd::KeyLength k = sek::qkd::key_length({a.n, a.delta, a.q, a.eps});
    sek::io::Json j;
    j["l"] = k.length;
    j["form"] = k.form;
    std::cout << sek::io::dump(j);
  } else {
    const auto t = sek::qkd::simulate_bb84(a.n, a.noise, a.sample_fraction, a.seed);
    std::cout << sek::io::dump(sek::io::transcript_to_json(t));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smooth-entropy uncertainty relations: entropies, audits and QKD key lengths"};
  app.require_subcommand(1);

  EntropyArgs ea;
  auto* entropy = app.add_subcommand("entropy", "conditional entropy of a state file (JSON)");
  entropy->add_option("state_file", ea.file, "state file")->required();
  entropy->add_option("--target", ea.target, "measured/target subsystem label");
  entropy->add_option("--condition", ea.condition, "conditioning labels (repeat or comma-separate)");
  entropy->add_option("--kind", ea.kind, "min, max or vn")
      ->check(CLI::IsMember({"min", "max", "vn"}));
  entropy->add_option("--eps", ea.eps, "smoothing parameter in [0, 1)");
  entropy->add_option("--dump-sdp", ea.dump, "write the SDP in SDPA sparse format");

  std::string fx, fz;
  auto* ov = app.add_subcommand("overlap", "overlap c and incompatibility q of two POVM files");
  ov->add_option("povm_x", fx, "first POVM file")->required();
  ov->add_option("povm_z", fz, "second POVM file")->required();

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "randomized audit of one uncertainty relation");
  check->add_option("--relation", ca.relation, "class, child, mother or mu")
      ->check(CLI::IsMember({"class", "child", "mother", "mu"}));
  check->add_option("--trials", ca.trials, "number of random instances")
      ->check(CLI::NonNegativeNumber);
  check->add_option("--dims", ca.dims, "dimensions of A,B,C, e.g. 2,2,2");
  check->add_option("--eps", ca.eps, "smoothing parameters, comma-separated");
  check->add_option("--seed", ca.seed, "64-bit seed");
  check->add_option("--report", ca.report, "report JSON path");
  check->add_option("--replay-dir", ca.replay_dir, "directory for a violating instance");
  check->add_option("--tolerance", ca.tolerance, "slack tolerance; may only loosen the default");
  check->add_flag("--no-tight", ca.no_tight, "skip the known tight instance");

  QkdArgs qa;
  auto* qkd = app.add_subcommand("qkd", "BB84 key-length formulas and simulation");
  qkd->add_option("--mode", qa.mode, "rate-curve, key-length or simulate")
      ->required()
      ->check(CLI::IsMember({"rate-curve", "key-length", "simulate"}));
  qkd->add_option("--q", qa.q, "incompatibility in bits");
  qkd->add_option("--delta", qa.delta, "disagreement fraction (key-length)");
  qkd->add_option("--delta-min", qa.delta_min, "rate-curve start");
  qkd->add_option("--delta-max", qa.delta_max, "rate-curve end");
  qkd->add_option("--steps", qa.steps, "rate-curve points");
  qkd->add_option("--n", qa.n, "raw key bits (key-length) or rounds (simulate)");
  qkd->add_option("--eps", qa.eps, "smoothing parameter, reported only");
  qkd->add_option("--noise", qa.noise, "depolarizing parameter (simulate)");
  qkd->add_option("--sample-fraction", qa.sample_fraction, "disclosed fraction (simulate)");
  qkd->add_option("--seed", qa.seed, "64-bit seed (simulate)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*entropy) return run_entropy(ea);
    if (*ov) return run_overlap(fx, fz);
    if (*check) return run_check(ca);
    if (*qkd) return run_qkd(qa);
  } catch (const sek::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::length_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
