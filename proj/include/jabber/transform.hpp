#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "jabber/pseudogen.hpp"
#include "jabber/stem_map.hpp"
#include "jabber/textmodel.hpp"

namespace jabber {

enum class TransformMode { Jabberwocky, Blank };

struct TransformConfig {
  TransformMode mode = TransformMode::Jabberwocky;
  // Fraction of content-word stems (types, not tokens) replaced. The
  // per-stem decision hashes the stem with the seed, so one stem gets the
  // same verdict at every occurrence and in every document.
  double replacement_fraction = 1.0;
  bool retain_digits = true;
  std::uint64_t seed = 0;
  // Forced replacements, original word -> replacement stem, applied to
  // matching tokens whether or not the fraction selects them.
  std::vector<std::pair<std::string, std::string>> pins;
  MapScope scope = MapScope::PerDocument;
};

// Everything jabberwockify needs besides the config. The model and
// filter are shared, immutable, and safe to reuse across documents.
struct TransformContext {
  const WordSet& function_words;
  const WordSet& exceptions;
  const Lexicon& lexicon;
  const CharNgramModel& model;
  const NoveltyFilter& filter;
};

struct TransformResult {
  std::string text;
  std::vector<std::string> warnings;
};

// Replaces selected content-word stems with generated pseudo-stems,
// re-attaching suffixes with canonical spelling and re-applying case.
// Function words, digits (by default), punctuation, and whitespace pass
// through untouched. New stems extend `map`; repeated stems reuse it.
TransformResult jabberwockify(std::string_view text, const TransformConfig& config,
                              const TransformContext& ctx, StemMap& map);

// Replaces selected content words with BLANK plus the canonical suffix
// spelling (BLANKs, BLANKed, BLANKing). Everything else passes through.
std::string mask(std::string_view text, const TransformConfig& config,
                 const WordSet& function_words, const WordSet& exceptions);

struct PinOutcome {
  std::string text;
  // One count per input pair, in order: occurrences replaced.
  std::vector<int> counts;
};

// Phrase-level substitution on already-transformed text: each occurrence
// of a phrase (matched case-insensitively on token boundaries) becomes
// the replacement phrase verbatim.
PinOutcome pin_phrases(std::string_view text,
                       const std::vector<std::pair<std::string, std::string>>& pairs,
                       const WordSet& function_words, const WordSet& exceptions);

struct InvertResult {
  std::string text;
  // Word tokens that look like pseudowords (absent from the lexicon) but
  // had no mapping; copied through verbatim.
  std::vector<std::string> residue;
};

// Maps pseudo-stem tokens back to their originals. The map's sidecar of
// stored surfaces is consulted first, which makes the round trip
// byte-exact; the reverse stem map covers forms the sidecar missed.
InvertResult invert(std::string_view text, const StemMap& map,
                    const WordSet& function_words, const WordSet& exceptions,
                    const Lexicon& lexicon);

// Serializes the residue list as a small JSON report.
std::string residue_report_json(const InvertResult& result);

}  // namespace jabber
