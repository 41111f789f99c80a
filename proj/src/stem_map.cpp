#include "jabber/stem_map.hpp"

#include <array>
#include <charconv>
#include <sstream>

#include "jabber/errors.hpp"
#include "jabber/util.hpp"

namespace jabber {

std::string_view to_string(MapScope scope) {
  return scope == MapScope::PerCorpus ? "corpus" : "document";
}

MapScope scope_from_string(std::string_view s) {
  if (s == "document") return MapScope::PerDocument;
  if (s == "corpus") return MapScope::PerCorpus;
  throw InputError("unknown stem map scope: " + std::string(s));
}

const std::string* StemMap::lookup(std::string_view stem) const {
  auto it = forward_.find(std::string(stem));
  return it == forward_.end() ? nullptr : &it->second;
}

const std::string* StemMap::reverse_lookup(std::string_view pseudo) const {
  auto it = reverse_.find(std::string(pseudo));
  return it == reverse_.end() ? nullptr : &it->second;
}

void StemMap::insert(const std::string& stem, const std::string& value) {
  auto fit = forward_.find(stem);
  if (fit != forward_.end()) {
    if (fit->second == value) return;
    throw InputError("stem map: '" + stem + "' already mapped to '" +
                     fit->second + "'");
  }
  if (value_in_use(value))
    throw InputError("stem map: value '" + value + "' already in use");
  forward_.emplace(stem, value);
  reverse_.emplace(value, stem);
  order_.emplace_back(stem, value);
}

bool StemMap::value_in_use(std::string_view value) const {
  return reverse_.count(std::string(value)) > 0;
}

bool StemMap::value_collides(std::string_view candidate) const {
  if (value_in_use(candidate)) return true;
  static constexpr std::array<std::string_view, 3> kEndings = {"s", "ed", "ing"};
  const std::string c(candidate);
  for (std::string_view e : kEndings) {
    if (value_in_use(c + std::string(e))) return true;
    if (c.size() > e.size() && c.compare(c.size() - e.size(), e.size(), e) == 0 &&
        value_in_use(c.substr(0, c.size() - e.size())))
      return true;
  }
  return false;
}

void StemMap::note_surface(const std::string& transformed,
                           const std::string& original) {
  auto [it, inserted] = surfaces_.emplace(transformed, original);
  if (!inserted && it->second != original) {
    conflicts_.push_back("surface '" + transformed + "' maps to both '" +
                         it->second + "' and '" + original + "'");
  }
}

std::string StemMap::serialize() const {
  std::ostringstream out;
  out << "# seed=" << seed_ << " scope=" << to_string(scope_) << "\n";
  for (const auto& [stem, value] : order_) out << stem << '\t' << value << '\n';
  for (const auto& [transformed, original] : surfaces_)
    out << "#@ " << transformed << '\t' << original << '\n';
  return out.str();
}

StemMap StemMap::parse(std::string_view text) {
  StemMap map;
  bool header_seen = false;
  for (const std::string& line : split_lines(text)) {
    if (line.empty()) continue;
    if (line.rfind("#@ ", 0) == 0) {
      const std::string body = line.substr(3);
      const std::size_t tab = body.find('\t');
      if (tab == std::string::npos)
        throw InputError("stem map: bad sidecar line: " + line);
      map.note_surface(body.substr(0, tab), body.substr(tab + 1));
      continue;
    }
    if (line[0] == '#') {
      // Header: "# seed=<n> scope=<document|corpus>". Other comments are
      // ignored so hand-annotated files still load.
      const std::size_t seed_at = line.find("seed=");
      const std::size_t scope_at = line.find("scope=");
      if (seed_at != std::string::npos && scope_at != std::string::npos) {
        const char* begin = line.data() + seed_at + 5;
        const char* end = line.data() + line.size();
        std::uint64_t seed = 0;
        const auto [ptr, ec] = std::from_chars(begin, end, seed);
        if (ec != std::errc()) throw InputError("stem map: bad seed in header");
        map.seed_ = seed;
        std::string scope_word = line.substr(scope_at + 6);
        const std::size_t sp = scope_word.find_first_of(" \t");
        if (sp != std::string::npos) scope_word.resize(sp);
        map.scope_ = scope_from_string(scope_word);
        header_seen = true;
      }
      continue;
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw InputError("stem map: line without tab: " + line);
    map.insert(line.substr(0, tab), line.substr(tab + 1));
  }
  if (!header_seen && !map.order_.empty())
    throw InputError("stem map: missing header line");
  return map;
}

void StemMap::save(const std::string& path) const {
  write_file(path, serialize());
}

StemMap StemMap::load(const std::string& path) {
  return parse(read_file(path));
}

}  // namespace jabber
