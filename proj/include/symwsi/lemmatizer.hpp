#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>

#include "symwsi/corpus_io.hpp"
#include "symwsi/error.hpp"
#include "symwsi/lemma_exceptions_data.hpp"

namespace symwsi {

class Lemmatizer {
 public:
  virtual ~Lemmatizer() = default;
  virtual std::string lemmatize(std::string_view word, std::optional<Pos> pos_hint = std::nullopt) const = 0;
};

/// Leaves words untouched. Used when lemmatization is ablated.
class NullLemmatizer final : public Lemmatizer {
 public:
  std::string lemmatize(std::string_view word, std::optional<Pos> = std::nullopt) const override {
    return std::string(word);
  }
};

using ExceptionTable = std::unordered_map<std::string, std::string>;

/// Reads `inflected<TAB>lemma` lines; `#` comments and blank lines are skipped.
inline ExceptionTable load_exception_table(std::istream& in) {
  ExceptionTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos)
      throw ParseError(line_no, "expected 'inflected<TAB>lemma'");
    table[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return table;
}

inline ExceptionTable load_exception_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lemma table " + path);
  return load_exception_table(in);
}

/// The irregular-form table shipped in data/lemma_exceptions.tsv.
inline const ExceptionTable& bundled_exception_table() {
  static const ExceptionTable table = [] {
    std::istringstream in{std::string(kLemmaExceptionsTsv)};
    return load_exception_table(in);
  }();
  return table;
}

/// English rule-based lemmatizer.
///
/// A word is lowercased, then rewritten until it reaches a fixed point. Each
/// rewrite first consults the exception table, then tries one suffix rule
/// (-ies/-ied -> y, -es/-s, -ing/-ed with consonant undoubling and silent-e
/// restoration). Lemmas that appear as table values are fixed points, so the
/// result is idempotent.
class RuleLemmatizer final : public Lemmatizer {
 public:
  RuleLemmatizer() : RuleLemmatizer(bundled_exception_table()) {}

  explicit RuleLemmatizer(ExceptionTable table) : table_(std::move(table)) {
    for (const auto& [form, lemma] : table_) protected_.emplace(lemma, lemma);
  }

  std::string lemmatize(std::string_view word, std::optional<Pos> pos_hint = std::nullopt) const override {
    std::string w(word);
    std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    // Every suffix rewrite shortens the word, so this terminates well within the bound.
    for (std::size_t guard = 0; guard <= word.size() + 1; ++guard) {
      auto next = step(w, pos_hint);
      if (!next || *next == w) break;
      w = std::move(*next);
    }
    return w;
  }

  const ExceptionTable& table() const { return table_; }

 private:
  static bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

  static bool is_consonant(char c) { return std::isalpha(static_cast<unsigned char>(c)) && !is_vowel(c); }

  static bool ends_with(std::string_view w, std::string_view suf) {
    return w.size() >= suf.size() && w.substr(w.size() - suf.size()) == suf;
  }

  static bool has_vowel(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return is_vowel(c) || c == 'y'; });
  }

  // Repairs a stem left by stripping -ed/-ing: "stopp" -> "stop", "bak" -> "bake".
  static std::string repair_stem(std::string stem) {
    const std::size_t n = stem.size();
    if (n >= 3 && stem[n - 1] == stem[n - 2] && std::string_view("bdgmnprt").find(stem[n - 1]) != std::string_view::npos) {
      stem.pop_back();
      return stem;
    }
    if (n >= 2) {
      char last = stem[n - 1], prev = stem[n - 2];
      if (last == 'v' || (last == 'c' && (prev == 'n' || prev == 'r' || prev == 'u')) ||
          (last == 'z' && is_vowel(prev))) {
        return stem + "e";
      }
    }
    // short consonant-vowel-consonant stems: "lik" -> "like", "smil" -> "smile"
    if ((n == 3 || n == 4) && is_consonant(stem[n - 3]) && is_vowel(stem[n - 2]) && is_consonant(stem[n - 1]) &&
        std::string_view("wxy").find(stem[n - 1]) == std::string_view::npos &&
        (n == 3 || is_consonant(stem[0]))) {
      return stem + "e";
    }
    return stem;
  }

  std::optional<std::string> step(const std::string& w, std::optional<Pos> pos) const {
    if (auto it = table_.find(w); it != table_.end()) return it->second;
    if (protected_.count(w)) return std::nullopt;
    if (w.size() < 3 || !std::all_of(w.begin(), w.end(), [](unsigned char c) { return std::isalpha(c); }))
      return std::nullopt;

    const bool plural_rules = !pos || *pos == Pos::noun || *pos == Pos::verb;
    const bool verb_rules = !pos || *pos == Pos::verb;

    if (plural_rules) {
      if (w.size() > 4 && ends_with(w, "ies")) return w.substr(0, w.size() - 3) + "y";
      if (w.size() > 4 && (ends_with(w, "sses") || ends_with(w, "xes") || ends_with(w, "zes") ||
                           ends_with(w, "ches") || ends_with(w, "shes")))
        return w.substr(0, w.size() - 2);
      if (w.size() >= 4 && w.back() == 's' && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is"))
        return w.substr(0, w.size() - 1);
    }
    if (verb_rules) {
      if (w.size() > 4 && ends_with(w, "ied")) return w.substr(0, w.size() - 3) + "y";
      if (w.size() >= 5 && ends_with(w, "ing")) {
        std::string stem = w.substr(0, w.size() - 3);
        if (has_vowel(stem)) return repair_stem(std::move(stem));
      }
      if (w.size() >= 4 && ends_with(w, "ed") && !ends_with(w, "eed")) {
        std::string stem = w.substr(0, w.size() - 2);
        if (stem.size() >= 2 && has_vowel(stem)) return repair_stem(std::move(stem));
      }
    }
    return std::nullopt;
  }

  ExceptionTable table_;
  std::unordered_map<std::string, std::string> protected_;
};

}  // namespace symwsi
