#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "symwsi/corpus_io.hpp"
#include "symwsi/error.hpp"
#include "symwsi/lemmatizer.hpp"

namespace symwsi {

inline constexpr std::string_view kSentenceStart = "<s>";
inline constexpr std::string_view kSentenceEnd = "</s>";

enum class Direction { forward, backward };

/// Wire spelling: "fwd" / "bwd".
inline std::string_view direction_code(Direction d) { return d == Direction::forward ? "fwd" : "bwd"; }

inline std::optional<Direction> parse_direction(std::string_view s) {
  if (s == "fwd") return Direction::forward;
  if (s == "bwd") return Direction::backward;
  return std::nullopt;
}

/// Conditioning context for one LM prediction. Tokens are in natural
/// sentence order; the prediction slot follows the last token (forward) or
/// precedes the first token (backward).
struct Query {
  std::string instance_id;
  Direction direction = Direction::forward;
  bool pattern_used = false;
  std::vector<std::string> context_tokens;
};

/// Forward and backward queries for one instance. With `use_pattern` the
/// target is kept and joined to the slot by `conjunction` ("sound and ___",
/// "___ and sound of ...").
inline std::pair<Query, Query> build_queries(const Instance& inst, bool use_pattern,
                                             std::string_view conjunction = "and") {
  const auto& tok = inst.tokens;
  const auto t = static_cast<std::ptrdiff_t>(inst.target_index);

  Query fwd{inst.id, Direction::forward, use_pattern, {}};
  fwd.context_tokens.emplace_back(kSentenceStart);
  fwd.context_tokens.insert(fwd.context_tokens.end(), tok.begin(), tok.begin() + t + (use_pattern ? 1 : 0));
  if (use_pattern) fwd.context_tokens.emplace_back(conjunction);

  Query bwd{inst.id, Direction::backward, use_pattern, {}};
  if (use_pattern) bwd.context_tokens.emplace_back(conjunction);
  bwd.context_tokens.insert(bwd.context_tokens.end(), tok.begin() + t + (use_pattern ? 0 : 1), tok.end());
  bwd.context_tokens.emplace_back(kSentenceEnd);

  return {std::move(fwd), std::move(bwd)};
}

struct SubstituteEntry {
  std::string word;
  double prob = 0.0;

  bool operator==(const SubstituteEntry&) const = default;
};

/// Ranked substitutes for one instance and direction, descending by probability.
struct SubstituteDistribution {
  std::string instance_id;
  Direction direction = Direction::forward;
  std::vector<SubstituteEntry> entries;
};

/// Descending probability, ties by word.
inline void sort_entries(std::vector<SubstituteEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const SubstituteEntry& a, const SubstituteEntry& b) {
    if (a.prob != b.prob) return a.prob > b.prob;
    return a.word < b.word;
  });
}

/// Keeps the top `cutoff` raw predictions, lemmatizes them, merges equal
/// lemmas by summing, and renormalizes to one.
inline SubstituteDistribution postprocess(const SubstituteDistribution& raw, const Lemmatizer& lemmatizer,
                                          std::size_t cutoff = 50) {
  if (cutoff < 1) throw Error("cutoff must be at least 1");
  if (raw.entries.empty())
    throw Error("empty substitute distribution for " + raw.instance_id + " (" +
                std::string(direction_code(raw.direction)) + ")");
  for (const auto& e : raw.entries)
    if (!(e.prob > 0.0) || !std::isfinite(e.prob))
      throw Error("non-positive probability for '" + e.word + "' in " + raw.instance_id);

  std::vector<SubstituteEntry> top = raw.entries;
  sort_entries(top);
  if (top.size() > cutoff) top.resize(cutoff);

  std::map<std::string, double> merged;
  for (const auto& e : top) merged[lemmatizer.lemmatize(e.word)] += e.prob;

  double total = 0.0;
  for (const auto& [w, p] : merged) total += p;

  SubstituteDistribution out{raw.instance_id, raw.direction, {}};
  out.entries.reserve(merged.size());
  for (const auto& [w, p] : merged) out.entries.push_back({w, p / total});
  sort_entries(out.entries);
  return out;
}

}  // namespace symwsi
