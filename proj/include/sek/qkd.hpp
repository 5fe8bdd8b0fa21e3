#pragma once

// Idealized key-length formulas and an entanglement-based BB84 simulation.
//
// All formula outputs are the leading-order expressions without finite-size
// corrections; results carry the label "asymptotic-form" to say so.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "sek/entropy.hpp"
#include "sek/errors.hpp"
#include "sek/measurement.hpp"
#include "sek/random.hpp"
#include "sek/state.hpp"

namespace sek::qkd {

inline constexpr const char* kForm = "asymptotic-form";

struct QkdParams {
  std::int64_t n = 0;     // raw-key bits
  double delta = 0.0;     // observed disagreement fraction
  double q = 1.0;         // incompatibility of Alice's bases
  double epsilon = 0.01;  // carried as metadata only

  void validate() const {
    if (n <= 0) throw ArgumentError("n must be positive");
    if (!(delta >= 0.0 && delta <= 0.5)) throw ArgumentError("delta must lie in [0, 1/2]");
    if (!(q >= 0.0) || !std::isfinite(q)) throw ArgumentError("q must be a nonnegative number");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ArgumentError("epsilon must lie in (0, 1)");
  }
};

struct KeyLength {
  std::int64_t length = 0;
  double epsilon = 0.0;
  std::string form = kForm;
  // how the secrecy bound was obtained
  std::string derivation =
      "H_min^eps(X|E) >= q n - H_max^eps(X|X'), with H_max^eps(X|X') ~ n h(delta)";
};

inline double rate(double q, double delta) {
  return std::max(0.0, q - 2.0 * binary_entropy(delta));
}

/// n h(delta), the leading-order bound on H_max^eps(X|X').
inline double max_entropy_bound(std::int64_t n, double delta) {
  if (n < 0) throw ArgumentError("n must be nonnegative");
  if (!(delta >= 0.0 && delta <= 0.5)) throw ArgumentError("delta must lie in [0, 1/2]");
  return static_cast<double>(n) * binary_entropy(delta);
}

inline KeyLength key_length(const QkdParams& p) {
  p.validate();
  const double raw =
      static_cast<double>(p.n) * (p.q - 2.0 * binary_entropy(p.delta));
  KeyLength out;
  out.length = raw > 0.0 ? static_cast<std::int64_t>(std::floor(raw)) : 0;
  out.epsilon = p.epsilon;
  return out;
}

/// floor(hmin - hmax), clamped at zero.
inline std::int64_t key_length_entropic(double hmin, double hmax) {
  if (!std::isfinite(hmin) || !std::isfinite(hmax))
    throw ArgumentError("entropies must be finite");
  const double raw = std::floor(hmin - hmax);
  return raw > 0.0 ? static_cast<std::int64_t>(raw) : 0;
}

/// Disagreement fraction at which q - 2 h(delta) reaches zero.
inline double critical_delta(double q) {
  if (!(q >= 0.0)) throw ArgumentError("q must be nonnegative");
  if (q == 0.0) return 0.0;
  if (q >= 2.0) return 0.5;
  double lo = 0.0, hi = 0.5;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (q - 2.0 * binary_entropy(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// `steps` evenly spaced points from delta_min to delta_max inclusive.
inline std::vector<std::pair<double, double>> rate_curve(double q, double delta_min,
                                                         double delta_max, int steps) {
  if (!(q >= 0.0)) throw ArgumentError("q must be nonnegative");
  if (!(delta_min >= 0.0 && delta_max <= 0.5 && delta_min <= delta_max))
    throw ArgumentError("delta range must satisfy 0 <= min <= max <= 1/2");
  if (steps < 1) throw ArgumentError("steps must be positive");
  if (steps == 1 && delta_min != delta_max)
    throw ArgumentError("a single step needs delta_min == delta_max");
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double d = steps == 1 ? delta_min
                                : delta_min + (delta_max - delta_min) * i / (steps - 1);
    out.emplace_back(d, rate(q, d));
  }
  return out;
}

/// Probability that Alice and Bob disagree when both measure the same BB84
/// basis on a maximally entangled pair sent through a depolarizing channel
/// rho -> (1 - p) rho + p 1/4.
inline double disagreement_probability(double noise_p) { return noise_p / 2.0; }

/// Inverse of disagreement_probability.
inline double noise_for_disagreement(double delta) { return 2.0 * delta; }

struct SimTranscript {
  std::int64_t n = 0;
  double noise_p = 0.0;
  double sample_fraction = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> basis_choices_alice, basis_choices_bob;  // 0 = Z, 1 = X
  std::vector<std::uint8_t> raw_alice, raw_bob;
  std::vector<std::int64_t> sifted_positions;  // rounds with matching bases
  std::vector<std::int64_t> sample_positions;  // indices into the sifted key
  std::int64_t sample_size = 0;
  std::int64_t n_key = 0;  // sifted bits left after disclosure
  double sampled_delta = 0.0;
  std::int64_t key_length = 0;
  bool aborted = false;
  std::string abort_reason;
  std::string form = kForm;
};

/// Recomputes the sifted positions and the disagreement fraction on the
/// disclosed sample from the raw transcript data.
inline double recompute_sampled_delta(const SimTranscript& t) {
  std::vector<std::int64_t> sifted;
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(t.raw_alice.size()); ++i)
    if (t.basis_choices_alice[i] == t.basis_choices_bob[i]) sifted.push_back(i);
  if (t.sample_positions.empty()) return 0.0;
  std::int64_t errors = 0;
  for (std::int64_t k : t.sample_positions) {
    const std::int64_t i = sifted.at(static_cast<std::size_t>(k));
    errors += t.raw_alice[i] != t.raw_bob[i];
  }
  return static_cast<double>(errors) / static_cast<double>(t.sample_positions.size());
}

namespace detail {

/// Joint outcome distribution p(a, b) for the four basis pairs, indexed
/// [alice_basis][bob_basis][2a + b], from the Born rule on the noisy pair.
inline std::array<std::array<std::array<double, 4>, 2>, 2> joint_tables(double noise_p) {
  Vector phi = Vector::Zero(4);
  phi(0) = phi(3) = M_SQRT1_2;
  const Matrix rho = (1.0 - noise_p) * projector(phi) + noise_p * identity(4) / 4.0;
  const Povm bases[2] = {computational_povm(2), hadamard_povm()};
  std::array<std::array<std::array<double, 4>, 2>, 2> out{};
  for (int ba = 0; ba < 2; ++ba)
    for (int bb = 0; bb < 2; ++bb)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const Matrix m = kron(bases[ba].element(a), bases[bb].element(b));
          out[ba][bb][2 * a + b] = std::max(0.0, (m * rho).trace().real());
        }
  return out;
}

}  // namespace detail

inline SimTranscript simulate_bb84(std::int64_t n, double noise_p, double sample_fraction,
                                   std::uint64_t seed) {
  if (n <= 0 || n > 10'000'000) throw ArgumentError("n must lie in [1, 1e7]");
  if (!(noise_p >= 0.0 && noise_p <= 1.0)) throw ArgumentError("noise_p must lie in [0, 1]");
  if (!(sample_fraction > 0.0 && sample_fraction < 1.0))
    throw ArgumentError("sample_fraction must lie in (0, 1)");

  SimTranscript t;
  t.n = n;
  t.noise_p = noise_p;
  t.sample_fraction = sample_fraction;
  t.seed = seed;
  const auto tables = detail::joint_tables(noise_p);
  Rng rng(seed);
  const auto un = static_cast<std::size_t>(n);
  t.basis_choices_alice.resize(un);
  t.basis_choices_bob.resize(un);
  t.raw_alice.resize(un);
  t.raw_bob.resize(un);
  for (std::size_t i = 0; i < un; ++i) {
    const int ba = rng.bit(), bb = rng.bit();
    const auto& p = tables[ba][bb];
    const double u = rng.uniform();
    int k = 0;
    for (double acc = p[0]; k < 3 && u >= acc; acc += p[++k]) {
    }
    t.basis_choices_alice[i] = static_cast<std::uint8_t>(ba);
    t.basis_choices_bob[i] = static_cast<std::uint8_t>(bb);
    t.raw_alice[i] = static_cast<std::uint8_t>(k >> 1);
    t.raw_bob[i] = static_cast<std::uint8_t>(k & 1);
    if (ba == bb) t.sifted_positions.push_back(static_cast<std::int64_t>(i));
  }

  const auto sifted = static_cast<std::int64_t>(t.sifted_positions.size());
  if (sifted == 0) {
    t.aborted = true;
    t.abort_reason = "no sifted rounds";
    return t;
  }
  std::int64_t m = std::llround(sample_fraction * static_cast<double>(sifted));
  m = std::clamp<std::int64_t>(m, 1, std::max<std::int64_t>(1, sifted - 1));
  // partial Fisher-Yates draws m positions without replacement
  std::vector<std::int64_t> idx(static_cast<std::size_t>(sifted));
  std::iota(idx.begin(), idx.end(), 0);
  for (std::int64_t i = 0; i < m; ++i) {
    const auto j = i + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(sifted - i)));
    std::swap(idx[i], idx[j]);
  }
  t.sample_positions.assign(idx.begin(), idx.begin() + m);
  std::sort(t.sample_positions.begin(), t.sample_positions.end());
  t.sample_size = m;
  t.n_key = sifted - m;
  t.sampled_delta = recompute_sampled_delta(t);

  if (t.n_key <= 0) {
    t.aborted = true;
    t.abort_reason = "no key bits left after sampling";
  } else if (t.sampled_delta >= critical_delta(1.0)) {
    t.aborted = true;
    t.abort_reason = "disagreement at or above the critical value";
  } else {
    t.key_length = key_length({t.n_key, t.sampled_delta, 1.0}).length;
  }
  return t;
}

}  // namespace sek::qkd
