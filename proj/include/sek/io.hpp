#pragma once

// JSON encoding of states and POVMs.  Complex matrices are row-major arrays
// of [re, im] pairs.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sek/errors.hpp"
#include "sek/measurement.hpp"
#include "sek/qkd.hpp"
#include "sek/state.hpp"

namespace sek::io {

using Json = nlohmann::ordered_json;

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (long i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (long j = 0; j < m.cols(); ++j)
      row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& j, long dim, const std::string& what) {
  if (!j.is_array() || static_cast<long>(j.size()) != dim)
    throw ArgumentError(what + ": expected " + std::to_string(dim) + " rows");
  Matrix m(dim, dim);
  for (long i = 0; i < dim; ++i) {
    const Json& row = j[i];
    if (!row.is_array() || static_cast<long>(row.size()) != dim)
      throw ArgumentError(what + ": row " + std::to_string(i) + " has wrong length");
    for (long k = 0; k < dim; ++k) {
      const Json& e = row[k];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw ArgumentError(what + ": entry (" + std::to_string(i) + "," +
                            std::to_string(k) + ") is not a [re, im] pair");
      m(i, k) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  if (!all_finite(m)) throw ArgumentError(what + ": non-finite entry");
  return m;
}

inline Json state_to_json(const MultipartiteState& s) {
  Json j;
  j["labels"] = s.labels();
  j["dims"] = s.dims();
  j["matrix"] = matrix_to_json(s.op());
  return j;
}

inline MultipartiteState state_from_json(const Json& j) {
  if (!j.is_object()) throw ArgumentError("state: expected a JSON object");
  for (const char* key : {"labels", "dims", "matrix"})
    if (!j.contains(key)) throw ArgumentError(std::string("state: missing \"") + key + "\"");
  Labels labels;
  Dims dims;
  try {
    labels = j.at("labels").get<Labels>();
    dims = j.at("dims").get<Dims>();
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("state: ") + e.what());
  }
  long dim = 1;
  for (long d : dims) {
    if (d <= 0) throw ArgumentError("state: dimensions must be positive");
    dim *= d;
    require_dim_within_cap(dim);
  }
  return {matrix_from_json(j.at("matrix"), dim, "state matrix"), dims, labels};
}

inline Json povm_to_json(const Povm& p) {
  Json j;
  j["dim"] = p.dim();
  j["outcomes"] = p.outcome_labels();
  Json elements = Json::array();
  for (const auto& m : p.elements()) elements.push_back(matrix_to_json(m));
  j["elements"] = std::move(elements);
  return j;
}

inline Povm povm_from_json(const Json& j, std::string name = "") {
  if (!j.is_object()) throw ArgumentError("POVM: expected a JSON object");
  for (const char* key : {"dim", "outcomes", "elements"})
    if (!j.contains(key)) throw ArgumentError(std::string("POVM: missing \"") + key + "\"");
  long dim = 0;
  std::vector<std::string> outcomes;
  try {
    dim = j.at("dim").get<long>();
    outcomes = j.at("outcomes").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("POVM: ") + e.what());
  }
  if (dim <= 0) throw ArgumentError("POVM: dim must be positive");
  require_dim_within_cap(dim);
  const Json& el = j.at("elements");
  if (!el.is_array()) throw ArgumentError("POVM: elements must be an array");
  std::vector<Matrix> elements;
  for (std::size_t i = 0; i < el.size(); ++i)
    elements.push_back(matrix_from_json(el[i], dim, "POVM element " + std::to_string(i)));
  return {std::move(elements), std::move(outcomes), std::move(name)};
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ArgumentError("'" + path + "' is not valid JSON: " + e.what());
  }
}

/// Serialized form with a trailing newline.
inline std::string dump(const Json& j) { return j.dump() + "\n"; }

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write '" + path + "'");
  out << dump(j);
  if (!out) throw ArgumentError("failed writing '" + path + "'");
}

inline MultipartiteState read_state_file(const std::string& path) {
  return state_from_json(read_json_file(path));
}

inline Povm read_povm_file(const std::string& path) {
  std::string name = path;
  if (const auto slash = name.find_last_of('/'); slash != std::string::npos)
    name = name.substr(slash + 1);
  return povm_from_json(read_json_file(path), name);
}

inline std::string bits_to_string(const std::vector<std::uint8_t>& bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) s[i] = '1';
  return s;
}

inline std::vector<std::uint8_t> bits_from_string(const std::string& s) {
  std::vector<std::uint8_t> bits(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') throw ArgumentError("bit string contains '" + std::string(1, s[i]) + "'");
    bits[i] = s[i] == '1';
  }
  return bits;
}

inline Json transcript_to_json(const qkd::SimTranscript& t) {
  Json j;
  j["form"] = t.form;
  j["seed"] = t.seed;
  j["n"] = t.n;
  j["noise_p"] = t.noise_p;
  j["sample_fraction"] = t.sample_fraction;
  j["sample_size"] = t.sample_size;
  j["n_key"] = t.n_key;
  j["sampled_delta"] = t.sampled_delta;
  j["key_length"] = t.key_length;
  j["aborted"] = t.aborted;
  j["abort_reason"] = t.abort_reason;
  j["basis_choices_alice"] = bits_to_string(t.basis_choices_alice);
  j["basis_choices_bob"] = bits_to_string(t.basis_choices_bob);
  j["raw_alice"] = bits_to_string(t.raw_alice);
  j["raw_bob"] = bits_to_string(t.raw_bob);
  j["sample_positions"] = t.sample_positions;
  return j;
}

/// Inverse of transcript_to_json; sifted positions are rebuilt from the bases.
inline qkd::SimTranscript transcript_from_json(const Json& j) {
  qkd::SimTranscript t;
  try {
    t.form = j.at("form").get<std::string>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.n = j.at("n").get<std::int64_t>();
    t.noise_p = j.at("noise_p").get<double>();
    t.sample_fraction = j.at("sample_fraction").get<double>();
    t.sample_size = j.at("sample_size").get<std::int64_t>();
    t.n_key = j.at("n_key").get<std::int64_t>();
    t.sampled_delta = j.at("sampled_delta").get<double>();
    t.key_length = j.at("key_length").get<std::int64_t>();
    t.aborted = j.at("aborted").get<bool>();
    t.abort_reason = j.at("abort_reason").get<std::string>();
    t.basis_choices_alice = bits_from_string(j.at("basis_choices_alice").get<std::string>());
    t.basis_choices_bob = bits_from_string(j.at("basis_choices_bob").get<std::string>());
    t.raw_alice = bits_from_string(j.at("raw_alice").get<std::string>());
    t.raw_bob = bits_from_string(j.at("raw_bob").get<std::string>());
    t.sample_positions = j.at("sample_positions").get<std::vector<std::int64_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("transcript: ") + e.what());
  }
  const std::size_t n = t.raw_alice.size();
  if (t.raw_bob.size() != n || t.basis_choices_alice.size() != n ||
      t.basis_choices_bob.size() != n)
    throw ArgumentError("transcript: bit strings differ in length");
  for (std::size_t i = 0; i < n; ++i)
    if (t.basis_choices_alice[i] == t.basis_choices_bob[i])
      t.sifted_positions.push_back(static_cast<std::int64_t>(i));
  return t;
}

/// "delta,rate" CSV with 10 significant digits.
inline std::string rate_curve_csv(const std::vector<std::pair<double, double>>& curve) {
  std::string out = "delta,rate\n";
  char buf[64];
  for (const auto& [d, r] : curve) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", d, r);
    out += buf;
  }
  return out;
}

}  // namespace sek::io
