#pragma once

// Language-model backends and the line-delimited JSON wire formats shared
// with the external scoring bridge.
//
//   query record:        {"instance_id", "direction": "fwd"|"bwd", "pattern": bool, "tokens": [...]}
//   distribution record: {"instance_id", "direction": "fwd"|"bwd", "pattern": bool, "entries": [[word, prob], ...]}

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "symwsi/error.hpp"
#include "symwsi/substitutes.hpp"

namespace symwsi {

/// Produces raw top-K substitute distributions. Implementations must be
/// deterministic and safe for concurrent `predict` calls.
class LMBackend {
 public:
  virtual ~LMBackend() = default;
  virtual SubstituteDistribution predict(const Query& query) const = 0;
};

inline std::string query_to_json_line(const Query& q) {
  nlohmann::ordered_json rec;
  rec["instance_id"] = q.instance_id;
  rec["direction"] = std::string(direction_code(q.direction));
  rec["pattern"] = q.pattern_used;
  rec["tokens"] = q.context_tokens;
  return rec.dump();
}

inline std::string distribution_to_json_line(const SubstituteDistribution& d, bool pattern) {
  nlohmann::ordered_json rec;
  rec["instance_id"] = d.instance_id;
  rec["direction"] = std::string(direction_code(d.direction));
  rec["pattern"] = pattern;
  auto entries = nlohmann::ordered_json::array();
  for (const auto& e : d.entries) entries.push_back({e.word, e.prob});
  rec["entries"] = std::move(entries);
  return rec.dump();
}

namespace detail {

template <class Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!rec.is_object()) throw ParseError(line_no, "record is not an object");
    fn(rec, line_no);
  }
}

struct WireHeader {
  std::string instance_id;
  Direction direction;
  bool pattern;
};

inline WireHeader wire_header(const nlohmann::json& rec, std::size_t line) {
  if (!rec.contains("instance_id") || !rec["instance_id"].is_string())
    throw ParseError(line, "missing string field 'instance_id'");
  if (!rec.contains("direction") || !rec["direction"].is_string())
    throw ParseError(line, "missing string field 'direction'");
  auto dir = parse_direction(rec["direction"].get<std::string>());
  if (!dir) throw ParseError(line, "direction must be \"fwd\" or \"bwd\"");
  if (!rec.contains("pattern") || !rec["pattern"].is_boolean())
    throw ParseError(line, "missing boolean field 'pattern'");
  return {rec["instance_id"].get<std::string>(), *dir, rec["pattern"].get<bool>()};
}

}  // namespace detail

inline std::vector<Query> read_queries(std::istream& in) {
  std::vector<Query> out;
  detail::for_each_json_line(in, [&](const nlohmann::json& rec, std::size_t line) {
    auto h = detail::wire_header(rec, line);
    if (!rec.contains("tokens") || !rec["tokens"].is_array()) throw ParseError(line, "missing array field 'tokens'");
    Query q{h.instance_id, h.direction, h.pattern, {}};
    for (const auto& t : rec["tokens"]) {
      if (!t.is_string()) throw ParseError(line, "non-string token");
      q.context_tokens.push_back(t.get<std::string>());
    }
    if (q.context_tokens.empty()) throw ParseError(line, "empty context");
    out.push_back(std::move(q));
  });
  return out;
}

struct StoredDistribution {
  SubstituteDistribution dist;
  bool pattern = false;
};

inline std::vector<StoredDistribution> read_distributions(std::istream& in) {
  std::vector<StoredDistribution> out;
  detail::for_each_json_line(in, [&](const nlohmann::json& rec, std::size_t line) {
    auto h = detail::wire_header(rec, line);
    if (!rec.contains("entries") || !rec["entries"].is_array()) throw ParseError(line, "missing array field 'entries'");
    StoredDistribution sd{{h.instance_id, h.direction, {}}, h.pattern};
    for (const auto& e : rec["entries"]) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_number())
        throw ParseError(line, "entries must be [word, prob] pairs");
      double p = e[1].get<double>();
      if (!(p > 0.0 && p <= 1.0)) throw ParseError(line, "probability outside (0,1]");
      sd.dist.entries.push_back({e[0].get<std::string>(), p});
    }
    out.push_back(std::move(sd));
  });
  return out;
}

/// Serves distributions precomputed by an external bridge, keyed by
/// (instance_id, direction, pattern).
class FileBackend final : public LMBackend {
 public:
  explicit FileBackend(std::istream& in) {
    std::size_t record = 0;
    for (auto& sd : read_distributions(in)) {
      ++record;
      Key key{sd.dist.instance_id, sd.dist.direction, sd.pattern};
      if (!store_.emplace(key, std::move(sd.dist.entries)).second)
        throw ParseError(0, "duplicate distribution record #" + std::to_string(record) + " for " + describe(key));
    }
  }

  static FileBackend load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open distribution file " + path);
    return FileBackend(in);
  }

  SubstituteDistribution predict(const Query& q) const override {
    Key key{q.instance_id, q.direction, q.pattern_used};
    auto it = store_.find(key);
    if (it == store_.end()) throw Error("no stored distribution for " + describe(key));
    return {q.instance_id, q.direction, it->second};
  }

  std::size_t size() const { return store_.size(); }

 private:
  using Key = std::tuple<std::string, Direction, bool>;

  static std::string describe(const Key& k) {
    return "(" + std::get<0>(k) + ", " + std::string(direction_code(std::get<1>(k))) +
           ", pattern=" + (std::get<2>(k) ? "true" : "false") + ")";
  }

  std::map<Key, std::vector<SubstituteEntry>> store_;
};

}  // namespace symwsi
