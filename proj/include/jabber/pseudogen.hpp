#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "jabber/rng.hpp"
#include "jabber/textmodel.hpp"

namespace jabber {

// Character n-gram model over lowercase a-z words, with begin/end
// sentinels framing each word. Counts are weighted by log(1 + frequency)
// and quantized to integers once at training time, so sampling later is
// pure integer arithmetic and byte-reproducible everywhere.
class CharNgramModel {
public:
  static constexpr char kBegin = '^';
  static constexpr char kEnd = '$';

  static CharNgramModel train(const std::vector<Lexicon::Entry>& entries, int order);

  int order() const { return order_; }

  // P(next | context), from the weighted counts. `context` is the raw
  // preceding characters (at most order-1; padded with the begin sentinel
  // on the left if shorter). Unseen context is an error.
  double probability(std::string_view context, char next) const;

  // True if `gram` (length = order, letters only) occurs inside some
  // training word, sentinels excluded.
  bool has_interior_ngram(std::string_view gram) const;

  // Random walk through the model. The end sentinel is only eligible
  // once min_len is reached; walks that dead-end restart, up to
  // max_restarts, after which a GenerationError is thrown.
  std::string sample_stem(int min_len, int max_len, SplitMix64& rng,
                          int max_restarts = 1000) const;

private:
  struct Row {
    // Sorted by character; cumulative sums are derived on the fly.
    std::vector<std::pair<char, std::uint64_t>> weights;
    std::uint64_t total = 0;
    std::uint64_t end_weight = 0;  // weight of the end sentinel, if any
  };

  std::string pad_context(std::string_view context) const;

  int order_ = 3;
  // std::map keeps deterministic iteration order; the table is built once
  // and only read afterwards.
  std::map<std::string, Row> rows_;
};

// Levenshtein distance with an early exit once the result is known to
// exceed `cap`; returns cap+1 then. The band keeps neighborhood checks
// cheap for small caps.
int capped_levenshtein(std::string_view a, std::string_view b, int cap);

// Rejects candidates that are real words or too close to frequent real
// words. Membership is checked against the whole lexicon; edit distance
// only against the `neighborhood_size` most frequent entries, bucketed by
// length so each candidate is compared to few of them.
class NoveltyFilter {
public:
  NoveltyFilter(const Lexicon& lexicon, int min_edit_distance = 2,
                std::size_t neighborhood_size = 5000);

  bool accept(std::string_view candidate) const;

  int min_edit_distance() const { return min_edit_; }

private:
  const Lexicon& lexicon_;
  int min_edit_;
  // neighbors_by_len_[L] holds neighborhood words of length L.
  std::vector<std::vector<std::string>> neighbors_by_len_;
};

// Target length window for a pseudo-stem, derived from the source stem:
// source length plus or minus 2, clamped into [3, 12].
struct LengthSpec {
  int min = 3;
  int max = 12;
  static LengthSpec around(std::size_t source_len);
};

// Samples stems until one passes the novelty filter and the caller's
// extra_reject hook (used for map injectivity). Throws GenerationError
// after max_attempts, naming the dominant rejection reason.
std::string generate_stem(
    const CharNgramModel& model, const NoveltyFilter& filter, LengthSpec lengths,
    SplitMix64& rng,
    const std::function<bool(const std::string&)>& extra_reject = {},
    int max_attempts = 10000);

}  // namespace jabber
