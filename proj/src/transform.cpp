#include "jabber/transform.hpp"

#include <nlohmann/json.hpp>

#include <sstream>
#include <unordered_map>

#include "jabber/errors.hpp"
#include "jabber/rng.hpp"
#include "jabber/util.hpp"

namespace jabber {

namespace {

// Per-stem replacement verdict under the configured fraction. Hashing
// stem with seed keeps the choice stable across occurrences, documents,
// and (for a fixed seed) runs.
bool fraction_selects(const TransformConfig& config, std::string_view stem) {
  if (config.replacement_fraction >= 1.0) return true;
  if (config.replacement_fraction <= 0.0) return false;
  const std::uint64_t h = splitmix_once(config.seed ^ fnv1a64(stem));
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return u < config.replacement_fraction;
}

std::string render_content(const Token& token, std::string_view stem) {
  std::string body(stem);
  if (token.morph) body += canonical_spelling(token.morph->suffix);
  return recase(token.case_pattern, body);
}

// Resolves pins to the keys a token can match under: the whole
// normalized word and its segmented stem.
struct PinTable {
  // normalized key -> (pin index, replacement stem lowercase)
  std::unordered_map<std::string, std::size_t> keys;
  std::vector<std::string> replacements;
  std::vector<int> hits;
};

PinTable build_pin_table(const TransformConfig& config, const WordSet& exceptions) {
  PinTable table;
  for (std::size_t i = 0; i < config.pins.size(); ++i) {
    const auto& [original, replacement] = config.pins[i];
    table.replacements.push_back(ascii_lower(normalize_word(replacement)));
    table.hits.push_back(0);
    const std::string whole = normalize_word(original);
    table.keys.emplace(whole, i);
    const MorphSplit split = segment(whole, exceptions);
    if (split.stem != whole) table.keys.emplace(split.stem, i);
  }
  return table;
}

const std::string* match_pin(PinTable& table, const Token& token) {
  if (table.keys.empty()) return nullptr;
  auto it = table.keys.find(normalize_word(token.surface));
  if (it == table.keys.end() && token.morph)
    it = table.keys.find(token.morph->stem);
  if (it == table.keys.end()) return nullptr;
  ++table.hits[it->second];
  return &table.replacements[it->second];
}

}  // namespace

TransformResult jabberwockify(std::string_view text, const TransformConfig& config,
                              const TransformContext& ctx, StemMap& map) {
  if (config.mode != TransformMode::Jabberwocky)
    throw ConfigError("jabberwockify called with non-Jabberwocky mode");

  const std::vector<Token> tokens =
      tokenize(text, ctx.function_words, ctx.exceptions);
  PinTable pins = build_pin_table(config, ctx.exceptions);

  // Acquires (or creates) the pseudo-stem for one original stem.
  auto pseudo_for = [&](const std::string& stem, std::size_t surface_len) {
    if (const std::string* existing = map.lookup(stem)) return *existing;
    SplitMix64 rng(splitmix_once(config.seed ^ fnv1a64(stem)));
    const std::string fresh = generate_stem(
        ctx.model, ctx.filter, LengthSpec::around(surface_len), rng,
        [&](const std::string& c) { return map.value_collides(c); });
    map.insert(stem, fresh);
    return fresh;
  };

  std::string out;
  out.reserve(text.size() + text.size() / 4);
  for (const Token& token : tokens) {
    switch (token.cls) {
      case TokenClass::Function:
      case TokenClass::Punctuation:
      case TokenClass::Whitespace:
        out += token.surface;
        continue;
      case TokenClass::NumeralDigit: {
        if (config.retain_digits) {
          out += token.surface;
        } else {
          const std::string stem = normalize_word(token.surface);
          const std::string rendered = pseudo_for(stem, stem.size());
          map.note_surface(rendered, token.surface);
          out += rendered;
        }
        continue;
      }
      case TokenClass::Content:
        break;
    }

    const std::string& stem = token.morph->stem;
    std::string rendered;
    if (const std::string* pinned = match_pin(pins, token)) {
      if (!map.lookup(stem) && !map.value_in_use(*pinned))
        map.insert(stem, *pinned);
      rendered = render_content(token, *pinned);
    } else if (!fraction_selects(config, stem)) {
      out += token.surface;
      continue;
    } else {
      rendered = render_content(token, pseudo_for(stem, stem.size()));
    }
    map.note_surface(rendered, token.surface);
    out += rendered;
  }

  TransformResult result{std::move(out), {}};
  for (std::size_t i = 0; i < config.pins.size(); ++i) {
    if (pins.hits[i] == 0)
      result.warnings.push_back("pin target not found: " + config.pins[i].first);
  }
  for (const std::string& c : map.conflicts())
    result.warnings.push_back("inversion may be inexact: " + c);
  return result;
}

std::string mask(std::string_view text, const TransformConfig& config,
                 const WordSet& function_words, const WordSet& exceptions) {
  const std::vector<Token> tokens = tokenize(text, function_words, exceptions);
  std::string out;
  out.reserve(text.size());
  for (const Token& token : tokens) {
    if (token.cls == TokenClass::Content &&
        fraction_selects(config, token.morph->stem)) {
      out += "BLANK";
      out += canonical_spelling(token.morph->suffix);
    } else if (token.cls == TokenClass::NumeralDigit && !config.retain_digits) {
      out += "BLANK";
    } else {
      out += token.surface;
    }
  }
  return out;
}

PinOutcome pin_phrases(std::string_view text,
                       const std::vector<std::pair<std::string, std::string>>& pairs,
                       const WordSet& function_words, const WordSet& exceptions) {
  PinOutcome outcome{std::string(text), std::vector<int>(pairs.size(), 0)};

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& [phrase, replacement] = pairs[p];
    // The phrase's own non-whitespace tokens are the match pattern.
    std::vector<std::string> pattern;
    for (const Token& t : tokenize(phrase, function_words, exceptions)) {
      if (t.cls != TokenClass::Whitespace) pattern.push_back(normalize_word(t.surface));
    }
    if (pattern.empty()) continue;

    const std::vector<Token> tokens =
        tokenize(outcome.text, function_words, exceptions);
    std::string rebuilt;
    rebuilt.reserve(outcome.text.size());
    std::size_t i = 0;
    while (i < tokens.size()) {
      if (tokens[i].cls == TokenClass::Whitespace) {
        rebuilt += tokens[i].surface;
        ++i;
        continue;
      }
      // Try to match the pattern starting here, skipping whitespace
      // between pattern elements.
      std::size_t j = i;
      std::size_t matched = 0;
      std::size_t last = i;
      while (j < tokens.size() && matched < pattern.size()) {
        if (tokens[j].cls == TokenClass::Whitespace) {
          ++j;
          continue;
        }
        if (normalize_word(tokens[j].surface) != pattern[matched]) break;
        ++matched;
        last = j;
        ++j;
      }
      if (matched == pattern.size()) {
        rebuilt += replacement;
        ++outcome.counts[p];
        i = last + 1;
      } else {
        rebuilt += tokens[i].surface;
        ++i;
      }
    }
    outcome.text = std::move(rebuilt);
  }
  return outcome;
}

InvertResult invert(std::string_view text, const StemMap& map,
                    const WordSet& function_words, const WordSet& exceptions,
                    const Lexicon& lexicon) {
  const std::vector<Token> tokens = tokenize(text, function_words, exceptions);
  const auto& surfaces = map.surface_pairs();

  InvertResult result;
  result.text.reserve(text.size());
  for (const Token& token : tokens) {
    const bool wordlike =
        token.cls == TokenClass::Content || token.cls == TokenClass::NumeralDigit;
    if (wordlike) {
      if (auto it = surfaces.find(token.surface); it != surfaces.end()) {
        result.text += it->second;
        continue;
      }
    }
    if (token.cls == TokenClass::Content) {
      if (const std::string* original = map.reverse_lookup(token.morph->stem)) {
        std::string body = *original;
        body += canonical_spelling(token.morph->suffix);
        result.text += recase(token.case_pattern, body);
        continue;
      }
      if (!lexicon.contains(token.morph->stem) &&
          !lexicon.contains(normalize_word(token.surface))) {
        result.residue.push_back(token.surface);
      }
    }
    result.text += token.surface;
  }
  return result;
}

std::string residue_report_json(const InvertResult& result) {
  nlohmann::json j;
  j["unmapped_tokens"] = result.residue;
  j["count"] = result.residue.size();
  return j.dump(2) + "\n";
}

}  // namespace jabber
