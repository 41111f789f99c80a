#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace jabber {

// FNV-1a, 64-bit. Stable across platforms; used for cache keys and for
// deterministic per-stem selection, never for security.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// True if the byte string is well-formed UTF-8 (no overlong forms, no
// surrogates, nothing above U+10FFFF).
bool is_valid_utf8(std::string_view s);

// Decodes the codepoint starting at byte offset i (which must be valid
// UTF-8) and advances i past it.
char32_t decode_utf8(std::string_view s, std::size_t& i);

// Number of bytes in the UTF-8 encoding of the codepoint at offset i.
std::size_t utf8_len_at(std::string_view s, std::size_t i);

// Whole-file read/write. Throw InputError on failure; write_file creates
// parent directories first.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// ASCII-only case helpers. Non-ASCII bytes pass through unchanged, which
// is all the word machinery needs: pseudowords and suffixes are ASCII.
std::string ascii_lower(std::string_view s);
std::string ascii_upper(std::string_view s);

std::string trim(std::string_view s);

std::vector<std::string> split_lines(std::string_view text);

// Current wall-clock time as "YYYY-MM-DDTHH:MM:SSZ" (UTC).
std::string iso8601_now();

}  // namespace jabber
