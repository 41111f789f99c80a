#include "jabber/pseudogen.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "jabber/errors.hpp"

namespace jabber {

namespace {

bool all_lower_alpha(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) {
    return c >= 'a' && c <= 'z';
  });
}

// Weight quantization. Scaling by 4096 before rounding keeps three to
// four significant digits of log(1+f), enough that relative frequencies
// survive, while all downstream arithmetic stays in integers.
std::uint64_t quantize_weight(std::uint64_t freq) {
  const double w = std::log1p(static_cast<double>(freq));
  const auto q = static_cast<std::uint64_t>(std::llround(4096.0 * w));
  return q > 0 ? q : 1;
}

}  // namespace

int capped_levenshtein(std::string_view a, std::string_view b, int cap) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  if (std::abs(n - m) > cap) return cap + 1;
  std::vector<int> prev(m + 1), cur(m + 1);
  for (int j = 0; j <= m; ++j) prev[j] = j;
  for (int i = 1; i <= n; ++i) {
    cur[0] = i;
    int row_min = cur[0];
    for (int j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
      row_min = std::min(row_min, cur[j]);
    }
    if (row_min > cap) return cap + 1;
    std::swap(prev, cur);
  }
  return prev[m];
}

CharNgramModel CharNgramModel::train(const std::vector<Lexicon::Entry>& entries,
                                     int order) {
  if (order < 2) throw InputError("ngram order must be at least 2");
  if (entries.empty()) throw InputError("cannot train on an empty lexicon");

  CharNgramModel model;
  model.order_ = order;

  std::map<std::string, std::map<char, std::uint64_t>> counts;
  for (const auto& [word, freq] : entries) {
    if (!all_lower_alpha(word))
      throw InputError("lexicon word is not lowercase alphabetic: " + word);
    const std::uint64_t w = quantize_weight(freq);
    const std::string framed =
        std::string(order - 1, kBegin) + word + std::string(1, kEnd);
    for (std::size_t i = 0; i + order <= framed.size(); ++i) {
      counts[framed.substr(i, order - 1)][framed[i + order - 1]] += w;
    }
  }

  for (auto& [ctx, table] : counts) {
    Row row;
    for (const auto& [c, w] : table) {
      row.weights.emplace_back(c, w);
      row.total += w;
      if (c == kEnd) row.end_weight = w;
    }
    model.rows_.emplace(ctx, std::move(row));
  }
  return model;
}

std::string CharNgramModel::pad_context(std::string_view context) const {
  const std::size_t want = static_cast<std::size_t>(order_ - 1);
  std::string ctx;
  if (context.size() >= want) {
    ctx = std::string(context.substr(context.size() - want));
  } else {
    ctx = std::string(want - context.size(), kBegin) + std::string(context);
  }
  return ctx;
}

double CharNgramModel::probability(std::string_view context, char next) const {
  const auto it = rows_.find(pad_context(context));
  if (it == rows_.end())
    throw InputError("ngram context never seen in training: " +
                     std::string(context));
  const Row& row = it->second;
  for (const auto& [c, w] : row.weights) {
    if (c == next)
      return static_cast<double>(w) / static_cast<double>(row.total);
  }
  return 0.0;
}

bool CharNgramModel::has_interior_ngram(std::string_view gram) const {
  if (gram.size() != static_cast<std::size_t>(order_)) return false;
  const auto it = rows_.find(std::string(gram.substr(0, gram.size() - 1)));
  if (it == rows_.end()) return false;
  const char next = gram.back();
  for (const auto& [c, w] : it->second.weights) {
    if (c == next) return w > 0;
  }
  return false;
}

std::string CharNgramModel::sample_stem(int min_len, int max_len,
                                        SplitMix64& rng, int max_restarts) const {
  if (min_len < 1 || min_len > max_len || max_len > 20)
    throw InputError("bad length range for sample_stem");

  for (int attempt = 0; attempt < max_restarts; ++attempt) {
    std::string word;
    bool dead_end = false;
    while (true) {
      const auto it = rows_.find(pad_context(word));
      if (it == rows_.end()) {
        dead_end = true;
        break;
      }
      const Row& row = it->second;
      const bool end_allowed = static_cast<int>(word.size()) >= min_len;
      const bool must_end = static_cast<int>(word.size()) >= max_len;

      if (must_end) {
        if (row.end_weight == 0) dead_end = true;
        break;
      }
      std::uint64_t total = row.total;
      if (!end_allowed) total -= row.end_weight;
      if (total == 0) {
        dead_end = true;
        break;
      }
      std::uint64_t pick = rng.next_below(total);
      char chosen = 0;
      for (const auto& [c, w] : row.weights) {
        if (!end_allowed && c == kEnd) continue;
        if (pick < w) {
          chosen = c;
          break;
        }
        pick -= w;
      }
      if (chosen == kEnd) break;
      word.push_back(chosen);
    }
    if (!dead_end && static_cast<int>(word.size()) >= min_len) return word;
  }
  throw GenerationError("sample_stem: no walk of length " +
                        std::to_string(min_len) + ".." + std::to_string(max_len) +
                        " found after " + std::to_string(max_restarts) +
                        " restarts");
}

NoveltyFilter::NoveltyFilter(const Lexicon& lexicon, int min_edit_distance,
                             std::size_t neighborhood_size)
    : lexicon_(lexicon), min_edit_(min_edit_distance) {
  if (min_edit_ < 1) throw InputError("min_edit_distance must be at least 1");
  std::size_t max_len = 0;
  const std::size_t k = std::min(neighborhood_size, lexicon.entries().size());
  for (std::size_t i = 0; i < k; ++i)
    max_len = std::max(max_len, lexicon.entries()[i].word.size());
  neighbors_by_len_.resize(max_len + 1);
  for (std::size_t i = 0; i < k; ++i) {
    const std::string& w = lexicon.entries()[i].word;
    neighbors_by_len_[w.size()].push_back(w);
  }
}

bool NoveltyFilter::accept(std::string_view candidate) const {
  if (lexicon_.contains(candidate)) return false;
  // Only lengths within min_edit_-1 can be closer than min_edit_.
  const int len = static_cast<int>(candidate.size());
  const int lo = std::max(1, len - (min_edit_ - 1));
  const int hi = std::min(static_cast<int>(neighbors_by_len_.size()) - 1,
                          len + (min_edit_ - 1));
  for (int L = lo; L <= hi; ++L) {
    for (const std::string& w : neighbors_by_len_[L]) {
      if (capped_levenshtein(candidate, w, min_edit_ - 1) < min_edit_)
        return false;
    }
  }
  return true;
}

LengthSpec LengthSpec::around(std::size_t source_len) {
  const int n = static_cast<int>(source_len);
  LengthSpec spec;
  spec.min = std::clamp(n - 2, 3, 12);
  spec.max = std::clamp(n + 2, 3, 12);
  return spec;
}

std::string generate_stem(
    const CharNgramModel& model, const NoveltyFilter& filter, LengthSpec lengths,
    SplitMix64& rng, const std::function<bool(const std::string&)>& extra_reject,
    int max_attempts) {
  int rejected_novelty = 0;
  int rejected_extra = 0;
  int sampling_failures = 0;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::string candidate;
    try {
      // A modest restart budget per attempt; exhaustion here counts
      // toward the overall attempt budget instead of aborting.
      candidate = model.sample_stem(lengths.min, lengths.max, rng, 100);
    } catch (const GenerationError&) {
      ++sampling_failures;
      continue;
    }
    if (!filter.accept(candidate)) {
      ++rejected_novelty;
      continue;
    }
    if (extra_reject && extra_reject(candidate)) {
      ++rejected_extra;
      continue;
    }
    return candidate;
  }

  std::string dominant = "novelty filter";
  int top = rejected_novelty;
  if (rejected_extra > top) {
    dominant = "caller rejection (injectivity)";
    top = rejected_extra;
  }
  if (sampling_failures > top) dominant = "sampling dead ends";
  throw GenerationError("generate_stem: gave up after " +
                        std::to_string(max_attempts) +
                        " attempts; dominant cause: " + dominant);
}

}  // namespace jabber
