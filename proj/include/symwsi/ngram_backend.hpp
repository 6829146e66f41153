#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "symwsi/backend.hpp"
#include "symwsi/error.hpp"

namespace symwsi {

using Sentence = std::vector<std::string>;

/// Whitespace-tokenized sentences, one per non-empty line.
inline std::vector<Sentence> read_corpus(std::istream& in) {
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    Sentence s;
    for (std::string tok; ss >> tok;) s.push_back(std::move(tok));
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<Sentence> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus " + path);
  return read_corpus(in);
}

/// Count-based n-gram language model pair used as a hermetic stand-in for a
/// neural biLM. The backward model is trained on reversed sentences.
///
/// Smoothing is add-k interpolated across orders:
///   P_0(w)   = (c(w) + k) / (N + k|V|)
///   P_m(w|h) = (c(h w) + k|V| P_{m-1}(w|h')) / (c(h) + k|V|)
/// where h' drops the most distant token of h. An unseen history leaves the
/// lower-order estimate unchanged.
class NgramBackend final : public LMBackend {
 public:
  struct Options {
    int order = 3;
    double k = 0.01;
    std::size_t top_k = 100;
  };

  static NgramBackend train(const std::vector<Sentence>& corpus, Options opts) {
    return NgramBackend(corpus, opts);
  }

  static NgramBackend train(const std::vector<Sentence>& corpus) { return NgramBackend(corpus, Options{}); }

  SubstituteDistribution predict(const Query& q) const override {
    auto probs = full_distribution(q.direction, q.context_tokens);
    std::vector<std::uint32_t> ids;
    ids.reserve(vocab_.size());
    for (std::uint32_t i = 0; i < vocab_.size(); ++i)
      if (i != bos_ && i != eos_) ids.push_back(i);
    const std::size_t keep = std::min(opts_.top_k, ids.size());
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(keep), ids.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        if (probs[a] != probs[b]) return probs[a] > probs[b];
                        return vocab_[a] < vocab_[b];
                      });
    SubstituteDistribution out{q.instance_id, q.direction, {}};
    out.entries.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) out.entries.push_back({vocab_[ids[i]], probs[ids[i]]});
    return out;
  }

  /// Probability of every vocabulary word (index order of `vocabulary()`),
  /// boundary markers included.
  std::vector<double> full_distribution(Direction dir, const std::vector<std::string>& context) const {
    const auto& model = dir == Direction::forward ? fwd_ : bwd_;
    const double V = static_cast<double>(vocab_.size());
    const double kv = opts_.k * V;

    std::vector<double> p(vocab_.size());
    for (std::size_t w = 0; w < p.size(); ++w)
      p[w] = (static_cast<double>(model.unigram[w]) + opts_.k) / (static_cast<double>(model.tokens) + kv);

    // nearest-first history
    std::vector<std::uint32_t> hist;
    const std::size_t want = static_cast<std::size_t>(opts_.order - 1);
    if (dir == Direction::forward) {
      for (std::size_t i = 0; i < context.size() && hist.size() < want; ++i)
        hist.push_back(id_of(context[context.size() - 1 - i]));
    } else {
      for (std::size_t i = 0; i < context.size() && hist.size() < want; ++i) hist.push_back(id_of(context[i]));
    }

    History h;
    for (std::size_t m = 1; m <= hist.size(); ++m) {
      h.push_back(hist[m - 1]);
      auto it = model.contexts.find(h);
      if (it == model.contexts.end()) continue;
      const auto& cc = it->second;
      const double denom = static_cast<double>(cc.total) + kv;
      std::vector<double> next(p.size());
      for (std::size_t w = 0; w < p.size(); ++w) next[w] = kv * p[w] / denom;
      for (const auto& [w, c] : cc.next) next[w] += static_cast<double>(c) / denom;
      p = std::move(next);
    }
    return p;
  }

  const std::vector<std::string>& vocabulary() const { return vocab_; }
  const Options& options() const { return opts_; }

 private:
  static constexpr std::uint32_t kUnknown = 0xffffffffu;

  // nearest-first context ids
  using History = std::vector<std::uint32_t>;

  struct ContextCounts {
    std::uint64_t total = 0;
    std::map<std::uint32_t, std::uint64_t> next;
  };

  struct DirectionalModel {
    std::vector<std::uint64_t> unigram;
    std::uint64_t tokens = 0;
    std::map<History, ContextCounts> contexts;
  };

  NgramBackend(const std::vector<Sentence>& corpus, Options opts) : opts_(opts) {
    if (corpus.empty()) throw Error("n-gram backend needs a non-empty corpus");
    if (opts_.order < 2) throw Error("n-gram order must be at least 2");
    if (opts_.k <= 0.0) throw Error("add-k constant must be positive");
    if (opts_.top_k < 1) throw Error("top_k must be at least 1");

    bos_ = intern(std::string(kSentenceStart));
    eos_ = intern(std::string(kSentenceEnd));
    std::vector<std::vector<std::uint32_t>> seqs;
    seqs.reserve(corpus.size());
    for (const auto& s : corpus) {
      std::vector<std::uint32_t> ids{bos_};
      for (const auto& tok : s) ids.push_back(intern(tok));
      ids.push_back(eos_);
      seqs.push_back(std::move(ids));
    }
    fwd_ = count(seqs);
    for (auto& s : seqs) std::reverse(s.begin(), s.end());
    bwd_ = count(seqs);
  }

  std::uint32_t intern(const std::string& w) {
    auto [it, inserted] = index_.emplace(w, static_cast<std::uint32_t>(vocab_.size()));
    if (inserted) vocab_.push_back(w);
    return it->second;
  }

  std::uint32_t id_of(const std::string& w) const {
    auto it = index_.find(w);
    return it == index_.end() ? kUnknown : it->second;
  }

  DirectionalModel count(const std::vector<std::vector<std::uint32_t>>& seqs) const {
    DirectionalModel m;
    m.unigram.assign(vocab_.size(), 0);
    const std::size_t max_hist = static_cast<std::size_t>(opts_.order - 1);
    for (const auto& s : seqs) {
      for (std::size_t i = 1; i < s.size(); ++i) {
        const auto w = s[i];
        ++m.unigram[w];
        ++m.tokens;
        History h;
        for (std::size_t d = 1; d <= max_hist && d <= i; ++d) {
          h.push_back(s[i - d]);
          auto& cc = m.contexts[h];
          ++cc.total;
          ++cc.next[w];
        }
      }
    }
    return m;
  }

  Options opts_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::uint32_t bos_ = 0, eos_ = 0;
  DirectionalModel fwd_, bwd_;
};

}  // namespace symwsi
