#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace jabber {

enum class TokenClass { Content, Function, NumeralDigit, Punctuation, Whitespace };

enum class CasePattern { AllLower, InitialCap, AllCaps, Mixed };

enum class Suffix { None, PluralS, PastEd, ProgIng, PossessiveS };

// How a content word decomposes into stem + inflectional ending.
// `spelling` is the ending as it appears in this particular surface form
// ("es" in "boxes", "s" in "laws"), so that stem + spelling always equals
// the lowercased surface. A possessive head ("state" in "state's") carries
// suffix PossessiveS with an empty spelling; the marker itself is a
// separate token.
struct MorphSplit {
  std::string stem;
  Suffix suffix = Suffix::None;
  std::string spelling;
};

struct Token {
  std::string surface;
  std::size_t begin = 0;  // byte offsets into the source text
  std::size_t end = 0;
  TokenClass cls = TokenClass::Whitespace;
  CasePattern case_pattern = CasePattern::AllLower;
  std::optional<MorphSplit> morph;  // present iff cls == Content
};

// A plain set of lowercase words loaded from a line-oriented file.
// Used for both the function-word list and the segmentation exceptions.
class WordSet {
public:
  WordSet() = default;
  static WordSet load(const std::string& path);
  static WordSet from_words(const std::vector<std::string>& words);

  // Expects a normalized (lowercase, straight-apostrophe) word.
  bool contains(std::string_view word) const {
    return words_.count(std::string(word)) > 0;
  }
  std::size_t size() const { return words_.size(); }

private:
  std::unordered_set<std::string> words_;
};

// Word-frequency table. Entries keep the order of the source file, which
// for the shipped lexicon is frequency-descending; that order defines the
// "k most frequent" neighborhoods used elsewhere.
class Lexicon {
public:
  struct Entry {
    std::string word;
    std::uint64_t freq;
  };

  static Lexicon load_tsv(const std::string& path);
  static Lexicon from_entries(std::vector<Entry> entries);

  bool contains(std::string_view word) const;
  std::uint64_t freq(std::string_view word) const;  // 0 when absent
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::uint64_t> index_;
};

// Lowercases ASCII and folds the curly apostrophe (U+2019) to '\''.
// All word lookups go through this, so curly and straight forms behave
// identically everywhere.
std::string normalize_word(std::string_view surface);

CasePattern case_pattern_of(std::string_view surface);

// Canonical written form of a suffix when re-attached to a new stem.
// PossessiveS yields "" because the marker survives as its own token.
std::string_view canonical_spelling(Suffix s);

// Splits an inflectional ending off a word. `word` may be any case; the
// returned stem is lowercase. Consults `exceptions` first (words kept
// whole), then tries the candidate endings longest-first with a few
// orthographic guards described in the FORMATS doc.
MorphSplit segment(std::string_view word, const WordSet& exceptions);

// Applies a case pattern to a lowercase word. Mixed falls back to
// InitialCap since arbitrary interior capitalization cannot be
// reconstructed on a different string. Empty input is an error.
std::string recase(CasePattern pattern, std::string_view word);

// Function iff the normalized surface is in the set; otherwise Content.
// Digits and punctuation never reach this.
TokenClass classify_word(std::string_view surface, const WordSet& function_words);

// Full pipeline: scan, classify, attach case patterns and morphology.
// Possessive markers ('s / curly variant) split into their own tokens.
// Throws InputError on invalid UTF-8.
std::vector<Token> tokenize(std::string_view text, const WordSet& function_words,
                            const WordSet& exceptions);

}  // namespace jabber
