#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "symwsi/error.hpp"
#include "symwsi/substitutes.hpp"

namespace symwsi {

struct SamplingConfig {
  std::size_t k = 20;      ///< representatives per instance
  std::size_t ell = 4;     ///< draws per direction
  std::uint64_t seed = 0;
};

/// Bag of 2*ell lemmas: the first `ell` drawn from the forward
/// distribution, the rest from the backward one. Duplicates are kept.
struct Representative {
  std::string instance_id;
  std::size_t index = 0;
  std::vector<std::string> words;
};

namespace seeding {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline constexpr std::uint64_t combine(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

/// Stable per-draw value for (seed, instance, representative, draw).
inline constexpr std::uint64_t draw_bits(std::uint64_t seed, std::string_view instance_id, std::uint64_t rep,
                                         std::uint64_t draw) {
  return combine(combine(combine(splitmix64(seed), fnv1a64(instance_id)), rep), draw);
}

/// Top 53 bits mapped to [0, 1).
inline constexpr double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

}  // namespace seeding

namespace detail {

inline const std::string& inverse_cdf(const std::vector<SubstituteEntry>& entries, double total, double u) {
  const double target = u * total;
  double acc = 0.0;
  for (const auto& e : entries) {
    acc += e.prob;
    if (target < acc) return e.word;
  }
  return entries.back().word;
}

inline double total_mass(const SubstituteDistribution& d) {
  double s = 0.0;
  for (const auto& e : d.entries) s += e.prob;
  return s;
}

}  // namespace detail

/// Draws `cfg.k` representatives. Draw d of representative r uses bits
/// derived only from (cfg.seed, instance id, r, d), so results do not
/// depend on evaluation order or threading.
inline std::vector<Representative> sample_representatives(const SubstituteDistribution& fwd,
                                                          const SubstituteDistribution& bwd,
                                                          const SamplingConfig& cfg) {
  if (cfg.k < 1 || cfg.ell < 1) throw Error("sampling needs k >= 1 and ell >= 1");
  if (fwd.entries.empty() || bwd.entries.empty())
    throw Error("cannot sample from an empty distribution for " + fwd.instance_id);

  const std::string& id = fwd.instance_id;
  const double fwd_total = detail::total_mass(fwd);
  const double bwd_total = detail::total_mass(bwd);

  std::vector<Representative> reps;
  reps.reserve(cfg.k);
  for (std::size_t r = 0; r < cfg.k; ++r) {
    Representative rep{id, r, {}};
    rep.words.reserve(2 * cfg.ell);
    for (std::size_t d = 0; d < 2 * cfg.ell; ++d) {
      const double u = seeding::to_unit(seeding::draw_bits(cfg.seed, id, r, d));
      rep.words.push_back(d < cfg.ell ? detail::inverse_cdf(fwd.entries, fwd_total, u)
                                      : detail::inverse_cdf(bwd.entries, bwd_total, u));
    }
    reps.push_back(std::move(rep));
  }
  return reps;
}

/// Debug dump line: {"instance_id", "rep_index", "words"}.
inline std::string representative_to_json_line(const Representative& r) {
  nlohmann::ordered_json rec;
  rec["instance_id"] = r.instance_id;
  rec["rep_index"] = r.index;
  rec["words"] = r.words;
  return rec.dump();
}

}  // namespace symwsi
