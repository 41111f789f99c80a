#include "jabber/textmodel.hpp"

#include <algorithm>
#include <array>

#include "jabber/errors.hpp"
#include "jabber/util.hpp"

namespace jabber {

namespace {

constexpr char32_t kCurlyApostrophe = 0x2019;

bool is_ascii_letter(char32_t c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_ascii_digit(char32_t c) { return c >= '0' && c <= '9'; }

bool is_whitespace_cp(char32_t c) {
  if (c == ' ' || (c >= 0x09 && c <= 0x0d)) return true;
  switch (c) {
    case 0xa0:     // no-break space
    case 0x1680:
    case 0x2028:   // line / paragraph separators
    case 0x2029:
    case 0x202f:
    case 0x205f:
    case 0x3000:
    case 0x200b:   // zero-width space
    case 0xfeff:   // BOM / zero-width no-break
      return true;
    default:
      return c >= 0x2000 && c <= 0x200a;
  }
}

bool is_currency_cp(char32_t c) {
  return c == '$' || c == 0xa3 || c == 0xa5 || c == 0x20ac;
}

// Non-ASCII codepoints we positively know to be punctuation. Anything
// else outside ASCII is assumed to be a letter, which errs toward
// keeping foreign words intact rather than shredding them.
bool is_punct_cp(char32_t c) {
  if (c < 0x80) return !is_ascii_letter(c) && !is_ascii_digit(c);
  switch (c) {
    case 0xa1:     // inverted exclamation / question
    case 0xbf:
    case 0xab:     // guillemets
    case 0xbb:
    case 0xb7:     // middle dot
    case 0x2022:   // bullet
    case 0x2026:   // ellipsis
    case 0x2032:
    case 0x2033:
    case 0x2039:
    case 0x203a:
    case 0x2212:   // minus sign
      return true;
    default:
      if (c >= 0x2010 && c <= 0x2015) return true;  // hyphens and dashes
      if (c >= 0x2018 && c <= 0x201f) return true;  // curly quotes
      return false;
  }
}

bool is_apostrophe_cp(char32_t c) {
  return c == '\'' || c == kCurlyApostrophe;
}

bool is_letter_cp(char32_t c) {
  if (c < 0x80) return is_ascii_letter(c);
  return !is_whitespace_cp(c) && !is_punct_cp(c) && !is_currency_cp(c);
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

// Sentence-terminal punctuation for the purpose of deciding whether a
// capitalized word begins a sentence.
bool is_terminal_punct(std::string_view surface) {
  return surface == "." || surface == "!" || surface == "?" ||
         surface == "…";
}

// Quote and bracket characters are transparent when walking back to find
// what precedes a word.
bool is_quoteish_punct(std::string_view surface) {
  static const std::array<std::string_view, 14> kQuoteish = {
      "\"", "'", "‘", "’", "“", "”", "«",
      "»", "(",  ")",      "[",      "]",      "{",      "}"};
  return std::find(kQuoteish.begin(), kQuoteish.end(), surface) !=
         kQuoteish.end();
}

}  // namespace

WordSet WordSet::load(const std::string& path) {
  WordSet set;
  for (const std::string& raw : split_lines(read_file(path))) {
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    set.words_.insert(normalize_word(line));
  }
  return set;
}

WordSet WordSet::from_words(const std::vector<std::string>& words) {
  WordSet set;
  for (const std::string& w : words) set.words_.insert(normalize_word(w));
  return set;
}

Lexicon Lexicon::load_tsv(const std::string& path) {
  std::vector<Entry> entries;
  for (const std::string& raw : split_lines(read_file(path))) {
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    std::string word = line.substr(0, tab);
    std::uint64_t freq = 1;
    if (tab != std::string::npos) {
      try {
        freq = std::stoull(line.substr(tab + 1));
      } catch (const std::exception&) {
        throw InputError("bad frequency in lexicon line: " + line);
      }
    }
    entries.push_back({normalize_word(word), freq});
  }
  return from_entries(std::move(entries));
}

Lexicon Lexicon::from_entries(std::vector<Entry> entries) {
  Lexicon lex;
  lex.entries_ = std::move(entries);
  for (const Entry& e : lex.entries_) {
    // Keep the larger count if a word repeats.
    auto [it, inserted] = lex.index_.emplace(e.word, e.freq);
    if (!inserted && it->second < e.freq) it->second = e.freq;
  }
  return lex;
}

bool Lexicon::contains(std::string_view word) const {
  return index_.count(std::string(word)) > 0;
}

std::uint64_t Lexicon::freq(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? 0 : it->second;
}

std::string normalize_word(std::string_view surface) {
  std::string out;
  out.reserve(surface.size());
  std::size_t i = 0;
  while (i < surface.size()) {
    const std::size_t len = utf8_len_at(surface, i);
    std::size_t j = i;
    const char32_t cp = decode_utf8(surface, j);
    if (cp == kCurlyApostrophe) {
      out.push_back('\'');
    } else if (cp < 0x80) {
      char c = surface[i];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      out.push_back(c);
    } else {
      out.append(surface.substr(i, len));
    }
    i += len;
  }
  return out;
}

CasePattern case_pattern_of(std::string_view surface) {
  int letters = 0;
  int uppers = 0;
  bool first_upper = false;
  bool tail_has_upper = false;
  for (char c : surface) {
    if (!is_ascii_letter(static_cast<unsigned char>(c))) continue;
    const bool up = (c >= 'A' && c <= 'Z');
    if (letters == 0) first_upper = up;
    else if (up) tail_has_upper = true;
    ++letters;
    if (up) ++uppers;
  }
  if (letters == 0 || uppers == 0) return CasePattern::AllLower;
  if (uppers == letters && letters >= 2) return CasePattern::AllCaps;
  if (first_upper && !tail_has_upper) return CasePattern::InitialCap;
  return CasePattern::Mixed;
}

std::string_view canonical_spelling(Suffix s) {
  switch (s) {
    case Suffix::PluralS: return "s";
    case Suffix::PastEd: return "ed";
    case Suffix::ProgIng: return "ing";
    // The possessive marker is carried by its own token, so re-attachment
    // contributes nothing here.
    case Suffix::PossessiveS: return "";
    case Suffix::None: return "";
  }
  return "";
}

MorphSplit segment(std::string_view word, const WordSet& exceptions) {
  const std::string w = normalize_word(word);
  if (exceptions.contains(w)) return {w, Suffix::None, ""};

  const std::size_t n = w.size();
  if (ends_with(w, "'s") && n >= 3) {
    return {w.substr(0, n - 2), Suffix::PossessiveS, "'s"};
  }
  if (ends_with(w, "ing") && n >= 5) {
    return {w.substr(0, n - 3), Suffix::ProgIng, "ing"};
  }
  // "-es" is only stripped as a unit after sibilant spellings where the
  // bare stem could not take a plain "-s" (boxes, churches, dresses).
  // Elsewhere the final "s" alone comes off so e-final stems survive
  // (devices -> device, specifies -> specifie).
  static const std::array<std::string_view, 5> kEsContexts = {
      "xes", "zes", "ches", "shes", "sses"};
  for (std::string_view ctx : kEsContexts) {
    if (ends_with(w, ctx) && n >= 4) {
      return {w.substr(0, n - 2), Suffix::PluralS, "es"};
    }
  }
  if (ends_with(w, "ed") && n >= 4) {
    return {w.substr(0, n - 2), Suffix::PastEd, "ed"};
  }
  if (ends_with(w, "s") && n >= 3 && !ends_with(w, "ss") &&
      !ends_with(w, "us") && !ends_with(w, "is") && w[n - 2] != '\'') {
    return {w.substr(0, n - 1), Suffix::PluralS, "s"};
  }
  return {w, Suffix::None, ""};
}

std::string recase(CasePattern pattern, std::string_view word) {
  if (word.empty()) throw InputError("recase: empty word");
  switch (pattern) {
    case CasePattern::AllLower:
      return std::string(word);
    case CasePattern::AllCaps:
      return ascii_upper(word);
    case CasePattern::InitialCap:
    case CasePattern::Mixed: {
      std::string out(word);
      if (out[0] >= 'a' && out[0] <= 'z')
        out[0] = static_cast<char>(out[0] - 'a' + 'A');
      return out;
    }
  }
  return std::string(word);
}

TokenClass classify_word(std::string_view surface, const WordSet& function_words) {
  return function_words.contains(normalize_word(surface)) ? TokenClass::Function
                                                          : TokenClass::Content;
}

namespace {

// Scans one numeral token starting at i, or returns i unchanged.
// Accepts an optional currency prefix, digits with interior commas and
// periods (only when followed by another digit), and a trailing percent.
std::size_t scan_numeral(std::string_view text, std::size_t i) {
  std::size_t j = i;
  std::size_t probe = j;
  const char32_t first = decode_utf8(text, probe);
  if (is_currency_cp(first)) {
    if (probe >= text.size()) return i;
    std::size_t p2 = probe;
    if (!is_ascii_digit(decode_utf8(text, p2))) return i;
    j = probe;
  } else if (!is_ascii_digit(first)) {
    return i;
  }
  bool any_digit = false;
  while (j < text.size()) {
    const char c = text[j];
    if (is_ascii_digit(static_cast<unsigned char>(c))) {
      any_digit = true;
      ++j;
      continue;
    }
    if ((c == ',' || c == '.') && j + 1 < text.size() &&
        is_ascii_digit(static_cast<unsigned char>(text[j + 1]))) {
      ++j;
      continue;
    }
    break;
  }
  if (!any_digit) return i;
  if (j < text.size() && text[j] == '%') ++j;
  return j;
}

// Scans one word starting at i: letters plus internal apostrophes.
std::size_t scan_word(std::string_view text, std::size_t i) {
  std::size_t j = i;
  while (j < text.size()) {
    std::size_t probe = j;
    const char32_t cp = decode_utf8(text, probe);
    if (is_letter_cp(cp)) {
      j = probe;
      continue;
    }
    if (is_apostrophe_cp(cp) && j > i && probe < text.size()) {
      std::size_t after = probe;
      if (is_letter_cp(decode_utf8(text, after))) {
        j = probe;
        continue;
      }
    }
    break;
  }
  return j;
}

// True if the word token at `idx` starts a sentence: it is the first word
// in the text, follows terminal punctuation, or follows a paragraph
// break. Quotes, brackets, and single line wraps are looked through.
bool sentence_initial(const std::vector<Token>& tokens, std::size_t idx) {
  for (std::size_t j = idx; j-- > 0;) {
    const Token& t = tokens[j];
    if (t.cls == TokenClass::Whitespace) {
      const auto newlines = std::count(t.surface.begin(), t.surface.end(), '\n');
      if (newlines >= 2) return true;
      continue;
    }
    if (t.cls == TokenClass::Punctuation) {
      if (is_terminal_punct(t.surface)) return true;
      if (is_quoteish_punct(t.surface)) continue;
      return false;
    }
    return false;
  }
  return true;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text, const WordSet& function_words,
                            const WordSet& exceptions) {
  if (!is_valid_utf8(text)) throw InputError("tokenize: input is not valid UTF-8");

  std::vector<Token> tokens;
  // Indices of word tokens that are possessive heads, fixed up after the
  // sentence-initial pass.
  std::vector<std::size_t> possessive_heads;
  std::vector<std::size_t> word_indices;

  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t probe = i;
    const char32_t cp = decode_utf8(text, probe);

    if (is_whitespace_cp(cp)) {
      std::size_t j = probe;
      while (j < text.size()) {
        std::size_t k = j;
        if (!is_whitespace_cp(decode_utf8(text, k))) break;
        j = k;
      }
      tokens.push_back({std::string(text.substr(i, j - i)), i, j,
                        TokenClass::Whitespace, CasePattern::AllLower, {}});
      i = j;
      continue;
    }

    if (const std::size_t j = scan_numeral(text, i); j > i) {
      tokens.push_back({std::string(text.substr(i, j - i)), i, j,
                        TokenClass::NumeralDigit, CasePattern::AllLower, {}});
      i = j;
      continue;
    }

    if (is_letter_cp(cp)) {
      std::size_t j = scan_word(text, i);
      std::string surface(text.substr(i, j - i));
      // Split a trailing possessive marker into its own token. The head
      // keeps PossessiveS in its morph; the marker keeps its original
      // apostrophe bytes.
      std::size_t marker_bytes = 0;
      if (ends_with(surface, "\xe2\x80\x99s")) {
        marker_bytes = 4;  // curly apostrophe + s
      } else if (ends_with(surface, "'s")) {
        marker_bytes = 2;
      }
      if (marker_bytes >= surface.size()) marker_bytes = 0;
      if (marker_bytes > 0) {
        const std::size_t head_len = surface.size() - marker_bytes;
        tokens.push_back({surface.substr(0, head_len), i, i + head_len,
                          TokenClass::Content, CasePattern::AllLower, {}});
        possessive_heads.push_back(tokens.size() - 1);
        word_indices.push_back(tokens.size() - 1);
        tokens.push_back({surface.substr(head_len), i + head_len, j,
                          TokenClass::Content, CasePattern::AllLower, {}});
        word_indices.push_back(tokens.size() - 1);
      } else {
        tokens.push_back({std::move(surface), i, j, TokenClass::Content,
                          CasePattern::AllLower, {}});
        word_indices.push_back(tokens.size() - 1);
      }
      i = j;
      continue;
    }

    // Punctuation, one codepoint per token.
    tokens.push_back({std::string(text.substr(i, probe - i)), i, probe,
                      TokenClass::Punctuation, CasePattern::AllLower, {}});
    i = probe;
  }

  // Classification and morphology.
  const std::vector<bool> is_head = [&] {
    std::vector<bool> v(tokens.size(), false);
    for (std::size_t idx : possessive_heads) v[idx] = true;
    return v;
  }();

  for (std::size_t idx : word_indices) {
    Token& t = tokens[idx];
    t.case_pattern = case_pattern_of(t.surface);
    t.cls = classify_word(t.surface, function_words);
    if (t.cls != TokenClass::Content) continue;

    if (is_head[idx]) {
      t.morph = MorphSplit{normalize_word(t.surface), Suffix::PossessiveS, ""};
      continue;
    }
    // Capitalized words away from a sentence start are treated as names:
    // no suffix is split off, so "Massachusetts" keeps its final s.
    const bool capitalized = t.case_pattern != CasePattern::AllLower;
    if (capitalized && !sentence_initial(tokens, idx)) {
      t.morph = MorphSplit{normalize_word(t.surface), Suffix::None, ""};
    } else {
      t.morph = segment(t.surface, exceptions);
    }
  }
  return tokens;
}

}  // namespace jabber
