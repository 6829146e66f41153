#pragma once

// Instance datasets (JSON lines) and sense key files
// (`<lemma>.<pos> <instance_id> <label>/<weight> ...`).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "symwsi/error.hpp"

namespace symwsi {

enum class Pos { noun, verb, adjective };

enum class Tense { past, present, future, other };

/// Single-letter code used in key files: n, v, j.
inline std::string_view pos_code(Pos p) {
  switch (p) {
    case Pos::noun: return "n";
    case Pos::verb: return "v";
    case Pos::adjective: return "j";
  }
  return "?";
}

inline std::string_view pos_name(Pos p) {
  switch (p) {
    case Pos::noun: return "noun";
    case Pos::verb: return "verb";
    case Pos::adjective: return "adjective";
  }
  return "?";
}

inline std::optional<Pos> parse_pos(std::string_view s) {
  if (s == "n" || s == "noun") return Pos::noun;
  if (s == "v" || s == "verb") return Pos::verb;
  if (s == "j" || s == "a" || s == "adj" || s == "adjective") return Pos::adjective;
  return std::nullopt;
}

inline std::string_view tense_name(Tense t) {
  switch (t) {
    case Tense::past: return "past";
    case Tense::present: return "present";
    case Tense::future: return "future";
    case Tense::other: return "other";
  }
  return "?";
}

inline std::optional<Tense> parse_tense(std::string_view s) {
  if (s == "past") return Tense::past;
  if (s == "present") return Tense::present;
  if (s == "future") return Tense::future;
  if (s == "other") return Tense::other;
  return std::nullopt;
}

struct Target {
  std::string lemma;
  Pos pos = Pos::noun;

  /// "sound.n"
  std::string key() const { return lemma + "." + std::string(pos_code(pos)); }

  auto operator<=>(const Target&) const = default;
  bool operator==(const Target&) const = default;
};

/// Parses "lemma.pos"; the pos is taken after the last dot.
inline std::optional<Target> parse_target_key(std::string_view key) {
  auto dot = key.rfind('.');
  if (dot == std::string_view::npos || dot == 0) return std::nullopt;
  auto pos = parse_pos(key.substr(dot + 1));
  if (!pos) return std::nullopt;
  return Target{std::string(key.substr(0, dot)), *pos};
}

struct Instance {
  std::string id;
  Target target;
  std::vector<std::string> tokens;
  std::size_t target_index = 0;
  std::optional<Tense> tense;

  const std::string& target_token() const { return tokens.at(target_index); }
};

/// label -> weight
using LabelWeights = std::map<std::string, double>;

/// Gold senses per instance; weights are positive applicability ratings.
struct GoldLabeling {
  std::map<std::string, LabelWeights> senses;
};

/// System clusters per instance; probabilities per instance sum to one.
struct SenseAssignment {
  std::map<std::string, LabelWeights> clusters;
};

/// Throws if any instance violates the probability invariants.
inline void validate(const SenseAssignment& a, double tol = 1e-9) {
  for (const auto& [id, probs] : a.clusters) {
    if (probs.empty()) throw Error("instance " + id + " has no clusters");
    double sum = 0.0;
    for (const auto& [label, p] : probs) {
      if (!(p > 0.0 && p <= 1.0 + tol))
        throw Error("instance " + id + ": probability out of (0,1] for " + label);
      sum += p;
    }
    if (std::abs(sum - 1.0) > tol)
      throw Error("instance " + id + ": probabilities sum to " + std::to_string(sum));
  }
}

struct Dataset {
  std::vector<Instance> instances;
  GoldLabeling gold;

  /// Instances keyed by target, targets in sorted lemma.pos order.
  std::map<Target, std::vector<Instance>> by_target() const {
    std::map<Target, std::vector<Instance>> out;
    for (const auto& inst : instances) out[inst.target].push_back(inst);
    return out;
  }

  std::map<std::string, Target> targets() const {
    std::map<std::string, Target> out;
    for (const auto& inst : instances) out.emplace(inst.id, inst.target);
    return out;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline Instance instance_from_json(const nlohmann::json& rec, std::size_t line) {
  auto fail = [line](const std::string& msg) -> ParseError { return ParseError(line, msg); };
  if (!rec.is_object()) throw fail("record is not an object");

  Instance inst;
  const char* id_key = rec.contains("id") ? "id" : "instance_id";
  if (!rec.contains(id_key) || !rec[id_key].is_string()) throw fail("missing string field 'id'");
  inst.id = rec[id_key].get<std::string>();
  if (inst.id.empty()) throw fail("empty instance id");

  if (!rec.contains("lemma") || !rec["lemma"].is_string()) throw fail("missing string field 'lemma'");
  inst.target.lemma = rec["lemma"].get<std::string>();
  if (inst.target.lemma.empty()) throw fail("empty lemma");
  std::transform(inst.target.lemma.begin(), inst.target.lemma.end(), inst.target.lemma.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

  if (!rec.contains("pos") || !rec["pos"].is_string()) throw fail("missing string field 'pos'");
  auto pos = parse_pos(rec["pos"].get<std::string>());
  if (!pos) throw fail("unknown pos '" + rec["pos"].get<std::string>() + "'");
  inst.target.pos = *pos;

  if (!rec.contains("tokens") || !rec["tokens"].is_array()) throw fail("missing array field 'tokens'");
  for (const auto& t : rec["tokens"]) {
    if (!t.is_string()) throw fail("non-string token");
    inst.tokens.push_back(t.get<std::string>());
  }
  if (inst.tokens.empty()) throw fail("empty token list");

  if (!rec.contains("target_index") || !rec["target_index"].is_number_integer())
    throw fail("missing integer field 'target_index'");
  auto idx = rec["target_index"].get<long long>();
  if (idx < 0 || static_cast<std::size_t>(idx) >= inst.tokens.size())
    throw fail("target_index " + std::to_string(idx) + " out of range for " +
               std::to_string(inst.tokens.size()) + " tokens");
  inst.target_index = static_cast<std::size_t>(idx);

  if (rec.contains("tense") && !rec["tense"].is_null()) {
    if (!rec["tense"].is_string()) throw fail("tense must be a string");
    auto t = parse_tense(rec["tense"].get<std::string>());
    if (!t) throw fail("unknown tense '" + rec["tense"].get<std::string>() + "'");
    inst.tense = *t;
  }
  return inst;
}

inline LabelWeights gold_from_json(const nlohmann::json& g, std::size_t line) {
  LabelWeights out;
  auto add = [&](const std::string& label, const nlohmann::json& w) {
    if (!w.is_number()) throw ParseError(line, "non-numeric gold weight for " + label);
    double v = w.get<double>();
    if (!(v > 0.0)) throw ParseError(line, "gold weight must be positive for " + label);
    out[label] += v;
  };
  if (g.is_object()) {
    for (const auto& [label, w] : g.items()) add(label, w);
  } else if (g.is_array()) {
    for (const auto& e : g) {
      if (e.is_string()) {
        out[e.get<std::string>()] += 1.0;
      } else if (e.is_array() && e.size() == 2 && e[0].is_string()) {
        add(e[0].get<std::string>(), e[1]);
      } else {
        throw ParseError(line, "gold entries must be labels or [label, weight] pairs");
      }
    }
  } else {
    throw ParseError(line, "gold must be an object or array");
  }
  if (out.empty()) throw ParseError(line, "gold present but empty");
  return out;
}

}  // namespace detail

/// Parses a JSON-lines instance file. Blank lines and `#` comments are skipped.
inline Dataset parse_instances(std::istream& in) {
  Dataset ds;
  std::set<std::string> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    Instance inst = detail::instance_from_json(rec, line_no);
    if (!seen.insert(inst.id).second) throw ParseError(line_no, "duplicate instance id " + inst.id);
    if (rec.contains("gold") && !rec["gold"].is_null())
      ds.gold.senses[inst.id] = detail::gold_from_json(rec["gold"], line_no);
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

inline Dataset parse_instances(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_instances(in);
}

/// Serializes one instance record (inverse of parse_instances for a single line).
inline std::string instance_to_json_line(const Instance& inst, const LabelWeights* gold = nullptr) {
  nlohmann::ordered_json rec;
  rec["id"] = inst.id;
  rec["lemma"] = inst.target.lemma;
  rec["pos"] = std::string(pos_code(inst.target.pos));
  rec["tokens"] = inst.tokens;
  rec["target_index"] = inst.target_index;
  if (inst.tense) rec["tense"] = std::string(tense_name(*inst.tense));
  if (gold) rec["gold"] = *gold;
  return rec.dump();
}

/// Raw content of a key file: weights exactly as written, plus the target of each instance.
struct KeyFile {
  std::map<std::string, LabelWeights> entries;
  std::map<std::string, Target> targets;

  GoldLabeling as_gold() const { return GoldLabeling{entries}; }

  /// Renormalizes each instance's weights to probabilities.
  SenseAssignment as_assignment() const {
    SenseAssignment a;
    for (const auto& [id, w] : entries) {
      double sum = 0.0;
      for (const auto& [l, v] : w) sum += v;
      auto& row = a.clusters[id];
      for (const auto& [l, v] : w)
        if (v > 0.0) row[l] = v / sum;
    }
    return a;
  }
};

inline KeyFile read_key_file(std::istream& in) {
  KeyFile kf;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = detail::trim(raw);
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (pos < line.size()) {
      auto next = line.find_first_of(" \t", pos);
      if (next == std::string_view::npos) next = line.size();
      if (next > pos) fields.push_back(line.substr(pos, next - pos));
      pos = next + 1;
    }
    if (fields.size() < 3)
      throw ParseError(line_no, "expected '<lemma>.<pos> <instance_id> <label>/<weight>...'");

    auto target = parse_target_key(fields[0]);
    if (!target) throw ParseError(line_no, "bad target key '" + std::string(fields[0]) + "'");
    std::string id(fields[1]);
    if (kf.entries.count(id)) throw ParseError(line_no, "duplicate instance id " + id);

    LabelWeights weights;
    for (std::size_t i = 2; i < fields.size(); ++i) {
      auto slash = fields[i].rfind('/');
      if (slash == std::string_view::npos || slash == 0)
        throw ParseError(line_no, "missing '/' weight separator in '" + std::string(fields[i]) + "'");
      auto w = detail::parse_double(fields[i].substr(slash + 1));
      if (!w) throw ParseError(line_no, "non-numeric weight in '" + std::string(fields[i]) + "'");
      weights[std::string(fields[i].substr(0, slash))] += *w;
    }
    kf.entries.emplace(id, std::move(weights));
    kf.targets.emplace(id, std::move(*target));
  }
  return kf;
}

inline KeyFile read_key_file(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_key_file(in);
}

/// One line per instance in lexicographic id order; labels by descending weight, ties by label.
inline std::string write_key_file(const std::map<std::string, LabelWeights>& entries,
                                  const std::map<std::string, Target>& targets) {
  std::string out;
  for (const auto& [id, weights] : entries) {
    auto t = targets.find(id);
    if (t == targets.end()) throw Error("no target known for instance " + id);
    if (weights.empty()) throw Error("instance " + id + " has no labels");
    std::vector<std::pair<std::string, double>> sorted(weights.begin(), weights.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    out += t->second.key();
    out += ' ';
    out += id;
    for (const auto& [label, w] : sorted) {
      out += ' ';
      out += label;
      out += '/';
      out += detail::format_fixed6(w);
    }
    out += '\n';
  }
  return out;
}

inline std::string write_key_file(const SenseAssignment& a, const std::map<std::string, Target>& targets) {
  return write_key_file(a.clusters, targets);
}

inline std::string write_key_file(const GoldLabeling& g, const std::map<std::string, Target>& targets) {
  return write_key_file(g.senses, targets);
}

}  // namespace symwsi
