#pragma once

// Pseudoword corpus generator. Occurrences of words from two unrelated
// vocabularies (instruments, fish) are merged under one artificial token;
// each instance's planted gold sense is the vocabulary its context came from.

#include <array>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "symwsi/corpus_io.hpp"
#include "symwsi/evaluation.hpp"
#include "symwsi/ngram_backend.hpp"
#include "symwsi/representatives.hpp"

namespace symwsi {

struct SyntheticOptions {
  std::size_t instances_per_sense = 50;
  std::size_t corpus_sentences = 2000;
  std::uint64_t seed = 1;
  std::string pseudoword = "guitarsalmon";
};

struct SyntheticData {
  Dataset dataset;                ///< instances with planted gold senses
  std::vector<Sentence> corpus;   ///< LM training text using the real words
};

namespace detail {

struct SenseTemplate {
  std::string_view label;
  std::vector<std::string_view> verbs;
  std::vector<std::string_view> tails;
  std::vector<std::string_view> words;
};

inline const std::array<SenseTemplate, 2>& synthetic_senses() {
  static const std::array<SenseTemplate, 2> senses{{
      {"music",
       {"played", "tuned", "strummed", "repaired", "practiced"},
       {"on stage", "in the band", "at the concert", "during rehearsal", "before the show"},
       {"guitar", "violin", "cello", "banjo", "piano", "harp"}},
      {"fish",
       {"cooked", "grilled", "caught", "cleaned", "smoked"},
       {"for dinner", "with lemon", "by the lake", "after lunch", "near the river"},
       {"salmon", "trout", "tuna", "cod", "perch", "carp"}},
  }};
  return senses;
}

inline const std::vector<std::string_view>& synthetic_subjects() {
  static const std::vector<std::string_view> s{"she", "he", "they", "my sister", "the student", "our neighbor"};
  return s;
}

// Counter-based generator so output is identical on every platform.
class SplitMixStream {
 public:
  explicit SplitMixStream(std::uint64_t seed) : state_(seeding::splitmix64(seed)) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(seeding::splitmix64(state_++) % n); }

 private:
  std::uint64_t state_;
};

inline void append_words(std::vector<std::string>& out, std::string_view phrase) {
  std::istringstream ss{std::string(phrase)};
  for (std::string w; ss >> w;) out.push_back(std::move(w));
}

// "<subject> <verb> the <word> <tail> ." ; returns the index of <word>.
inline std::size_t make_sentence(SplitMixStream& rng, const SenseTemplate& sense, std::string_view word,
                                 std::vector<std::string>& tokens) {
  const auto& subj = synthetic_subjects();
  append_words(tokens, subj[rng.below(subj.size())]);
  append_words(tokens, sense.verbs[rng.below(sense.verbs.size())]);
  tokens.emplace_back("the");
  const std::size_t at = tokens.size();
  tokens.emplace_back(word);
  append_words(tokens, sense.tails[rng.below(sense.tails.size())]);
  tokens.emplace_back(".");
  return at;
}

}  // namespace detail

inline SyntheticData make_synthetic(const SyntheticOptions& opts = {}) {
  if (opts.instances_per_sense < 1 || opts.corpus_sentences < 1) throw Error("synthetic sizes must be positive");
  if (opts.pseudoword.empty()) throw Error("pseudoword must be non-empty");
  const auto& senses = detail::synthetic_senses();
  detail::SplitMixStream rng(opts.seed);

  SyntheticData out;
  for (std::size_t i = 0; i < opts.corpus_sentences; ++i) {
    const auto& sense = senses[rng.below(senses.size())];
    Sentence s;
    detail::make_sentence(rng, sense, sense.words[rng.below(sense.words.size())], s);
    out.corpus.push_back(std::move(s));
  }

  const Target target{opts.pseudoword, Pos::noun};
  std::size_t serial = 0;
  for (std::size_t i = 0; i < opts.instances_per_sense; ++i) {
    for (const auto& sense : senses) {
      Instance inst;
      inst.id = target.key() + "." + std::to_string(++serial);
      inst.target = target;
      inst.target_index = detail::make_sentence(rng, sense, opts.pseudoword, inst.tokens);
      out.dataset.gold.senses[inst.id] = {{opts.pseudoword + "." + std::string(sense.label), 1.0}};
      out.dataset.instances.push_back(std::move(inst));
    }
  }
  return out;
}

/// Share of instances whose most probable cluster's majority gold sense is
/// their own gold sense (argmax over gold weights).
inline double majority_purity(const GoldLabeling& gold, const SenseAssignment& sys) {
  std::map<std::string, std::map<std::string, std::size_t>> votes;  // cluster -> sense -> count
  std::map<std::string, std::pair<std::string, std::string>> picked;  // id -> (cluster, sense)
  for (const auto& [id, probs] : sys.clusters) {
    auto g = gold.senses.find(id);
    if (g == gold.senses.end()) throw Error("instance " + id + " has no gold senses");
    std::string cluster = argmax_label(probs);
    std::string sense = argmax_label(g->second);
    ++votes[cluster][sense];
    picked[id] = {cluster, sense};
  }
  if (picked.empty()) throw Error("empty assignment");
  std::map<std::string, std::string> majority;
  for (const auto& [cluster, counts] : votes) {
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
      if (it->second > best->second) best = it;
    majority[cluster] = best->first;
  }
  std::size_t hit = 0;
  for (const auto& [id, cs] : picked)
    if (majority[cs.first] == cs.second) ++hit;
  return static_cast<double>(hit) / static_cast<double>(picked.size());
}

}  // namespace symwsi
