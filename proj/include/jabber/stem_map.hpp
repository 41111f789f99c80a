#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace jabber {

enum class MapScope { PerDocument, PerCorpus };

std::string_view to_string(MapScope scope);
MapScope scope_from_string(std::string_view s);

// The realized stem -> pseudo-stem mapping for one transform run, plus a
// sidecar of surface pairs that makes inversion byte-exact. The forward
// map is injective and keeps first-occurrence order for serialization.
class StemMap {
public:
  StemMap() = default;
  StemMap(std::uint64_t seed, MapScope scope) : seed_(seed), scope_(scope) {}

  std::uint64_t seed() const { return seed_; }
  MapScope scope() const { return scope_; }
  std::size_t size() const { return order_.size(); }

  // nullptr when absent.
  const std::string* lookup(std::string_view stem) const;
  const std::string* reverse_lookup(std::string_view pseudo) const;

  // Throws InputError if the stem is already mapped to something else or
  // the value is already in use for another stem.
  void insert(const std::string& stem, const std::string& value);

  bool value_in_use(std::string_view value) const;

  // True if mapping some stem to `candidate` could later render the same
  // surface as an existing value: candidate equal to an existing value
  // extended by an inflectional ending, or the reverse. generate_stem
  // callers use this as their extra_reject hook.
  bool value_collides(std::string_view candidate) const;

  // Sidecar of (transformed surface -> original surface) pairs. First
  // writer wins; a conflicting second pair is reported in `conflicts`.
  void note_surface(const std::string& transformed, const std::string& original);
  const std::map<std::string, std::string>& surface_pairs() const {
    return surfaces_;
  }
  const std::vector<std::string>& conflicts() const { return conflicts_; }

  // Entries in first-occurrence order.
  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return order_;
  }

  std::string serialize() const;
  static StemMap parse(std::string_view text);
  void save(const std::string& path) const;
  static StemMap load(const std::string& path);

private:
  std::uint64_t seed_ = 0;
  MapScope scope_ = MapScope::PerDocument;
  std::vector<std::pair<std::string, std::string>> order_;
  std::unordered_map<std::string, std::string> forward_;
  std::unordered_map<std::string, std::string> reverse_;
  std::map<std::string, std::string> surfaces_;
  std::vector<std::string> conflicts_;
};

}  // namespace jabber
