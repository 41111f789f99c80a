// End-to-end acceptance checks. Each test case covers one numbered
// criterion and prints a single [PASS]/[FAIL] line with its runtime, so
// the ctest log doubles as a checklist.

#include <doctest.h>

#include <sys/wait.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "jabber/agentloop.hpp"
#include "jabber/errors.hpp"
#include "jabber/evalharness.hpp"
#include "jabber/pseudogen.hpp"
#include "jabber/stem_map.hpp"
#include "jabber/transform.hpp"
#include "jabber/util.hpp"

using namespace jabber;

namespace {

const std::string kSourceDir = JABBER_SOURCE_DIR;
const std::string kCli = JABBER_CLI_PATH;
const std::string kStubgame = JABBER_STUBGAME_PATH;

// Shared fixtures, loaded once.
struct Shared {
  Lexicon lexicon;
  WordSet function_words;
  WordSet exceptions;
  CharNgramModel model;
  NoveltyFilter filter;

  Shared()
      : lexicon(Lexicon::load_tsv(kSourceDir + "/data/lexicon_en.tsv")),
        function_words(WordSet::load(kSourceDir + "/data/function_words.txt")),
        exceptions(WordSet::load(kSourceDir + "/data/segment_exceptions.txt")),
        model(CharNgramModel::train(lexicon.entries(), 3)),
        filter(lexicon) {}

  TransformContext ctx() const {
    return {function_words, exceptions, lexicon, model, filter};
  }
};

const Shared& shared() {
  static Shared s;
  return s;
}

// Collects failure notes for one criterion and prints the summary line.
class Criterion {
public:
  Criterion(int number, std::string description)
      : number_(number),
        description_(std::move(description)),
        start_(std::chrono::steady_clock::now()) {}

  void expect(bool ok, const std::string& why) {
    if (!ok && notes_.size() < 8) notes_.push_back(why);
    if (!ok) ++failures_;
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

  // Prints the line; the returned flag feeds one doctest CHECK.
  bool finish() const {
    const bool ok = failures_ == 0;
    std::printf("[%s] criterion %d (%.2f s): %s\n", ok ? "PASS" : "FAIL",
                number_, elapsed(), description_.c_str());
    for (const std::string& n : notes_) std::printf("        - %s\n", n.c_str());
    if (failures_ > static_cast<int>(notes_.size()))
      std::printf("        - (%d further failures suppressed)\n",
                  failures_ - static_cast<int>(notes_.size()));
    std::fflush(stdout);
    return ok;
  }

private:
  int number_;
  std::string description_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> notes_;
  int failures_ = 0;
};

std::string run_cli(const std::string& args, int* exit_code) {
  const std::string cmd = kCli + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  if (exit_code) *exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

// Token surfaces with whitespace dropped: the comparison view used by
// the masking-oracle criterion.
std::vector<std::string> significant_tokens(const std::string& text) {
  std::vector<std::string> out;
  for (const Token& t :
       tokenize(text, shared().function_words, shared().exceptions)) {
    if (t.cls != TokenClass::Whitespace) out.push_back(t.surface);
  }
  return out;
}

// ---------------------------------------------------------------------
// Synthetic English-ish documents for the round-trip and transparency
// criteria: lexicon words with realistic capitalization, digits,
// possessives, hyphens, and punctuation.
// ---------------------------------------------------------------------

const std::vector<std::string>& content_pool() {
  static std::vector<std::string> pool = [] {
    std::vector<std::string> words;
    for (const auto& e : shared().lexicon.entries()) {
      if (words.size() >= 3000) break;
      if (e.word.size() < 3 || e.word.find('\'') != std::string::npos) continue;
      if (shared().function_words.contains(e.word)) continue;
      words.push_back(e.word);
    }
    return words;
  }();
  return pool;
}

const std::vector<std::string>& function_pool() {
  static const std::vector<std::string> pool = {
      "the",  "a",    "an",   "of",   "in",   "on",   "and",  "or",
      "is",   "was",  "that", "with", "for",  "to",   "from", "this",
      "be",   "has",  "should", "when", "what", "any", "if",  "over"};
  return pool;
}

std::string capitalized(std::string w) {
  if (!w.empty() && w[0] >= 'a' && w[0] <= 'z')
    w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

std::string all_caps(std::string w) {
  for (char& c : w)
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  return w;
}

std::string synth_sentence(std::mt19937& gen, bool allow_decorations) {
  const auto& content = content_pool();
  const auto& function = function_pool();
  std::uniform_int_distribution<int> len_dist(5, 13);
  std::uniform_int_distribution<int> pct(0, 99);

  const int len = len_dist(gen);
  std::string out;
  for (int i = 0; i < len; ++i) {
    std::string word = pct(gen) < 35 ? function[gen() % function.size()]
                                     : content[gen() % content.size()];
    if (i == 0) {
      word = capitalized(word);
    } else if (allow_decorations) {
      const int roll = pct(gen);
      if (roll < 4) word = capitalized(word);         // mid-sentence proper noun
      else if (roll < 6) word = all_caps(word);       // shouting
      else if (roll < 10) word += (gen() % 2) ? "'s" : "’s";
      else if (roll < 13) word = std::to_string(gen() % 5000);  // numerals
      else if (roll < 15) word = "$" + std::to_string(1 + gen() % 900) + "," +
                                 std::to_string(100 + gen() % 900);
      else if (roll < 17) word = std::to_string(gen() % 100) + "%";
      else if (roll < 20)
        word = content[gen() % content.size()] + "-" + content[gen() % content.size()];
    }
    if (i > 0) out += (allow_decorations && pct(gen) < 7) ? ", " : " ";
    out += word;
  }
  const char* enders[] = {".", ".", ".", "!", "?"};
  out += enders[gen() % 5];
  return out;
}

std::string synth_doc(std::mt19937& gen) {
  std::uniform_int_distribution<int> sentences(4, 9);
  const int n = sentences(gen);
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i > 0) out += (gen() % 4 == 0) ? "\n\n" : " ";
    out += synth_sentence(gen, true);
  }
  out += "\n";
  return out;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::path("/tmp") /
           ("jabber_accept_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

}  // namespace

TEST_CASE("criterion 1: masking oracle") {
  Criterion c(1,
              "cmd_mask reproduces the reference masked legal passage "
              "token-for-token (whitespace-normalized), under 1 s");

  const auto t0 = std::chrono::steady_clock::now();
  int exit_code = -1;
  const std::string got =
      run_cli("mask " + kSourceDir + "/tests/data/preemption.txt", &exit_code);
  const double cli_secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  c.expect(exit_code == 0, "mask exited with code " + std::to_string(exit_code));

  const std::string want = read_file(kSourceDir + "/tests/data/preemption_masked.txt");
  const auto got_tokens = significant_tokens(got);
  const auto want_tokens = significant_tokens(want);
  c.expect(got_tokens.size() == want_tokens.size(),
           "token count " + std::to_string(got_tokens.size()) + " vs " +
               std::to_string(want_tokens.size()));
  std::size_t agree = 0;
  const std::size_t limit = std::min(got_tokens.size(), want_tokens.size());
  for (std::size_t i = 0; i < limit; ++i) {
    if (got_tokens[i] == want_tokens[i]) {
      ++agree;
    } else {
      c.expect(false, "token " + std::to_string(i) + ": got '" + got_tokens[i] +
                          "' want '" + want_tokens[i] + "'");
    }
  }
  c.expect(agree == want_tokens.size() && !want_tokens.empty(),
           "agreement below 100%");
  c.expect(cli_secs < 1.0,
           "cli run took " + std::to_string(cli_secs) + " s (limit 1 s)");
  CHECK(c.finish());
}

TEST_CASE("criterion 2: round trip") {
  Criterion c(2,
              "invert(jabberwockify(d)) == d byte-for-byte over a 50-document "
              "synthetic corpus, under 10 s total");

  std::mt19937 gen(220821);
  int checked = 0;
  for (int d = 0; d < 50; ++d) {
    const std::string doc = synth_doc(gen);
    TransformConfig config;
    config.seed = 1000 + static_cast<std::uint64_t>(d);
    StemMap map(config.seed, config.scope);
    const TransformResult fwd = jabberwockify(doc, config, shared().ctx(), map);
    const InvertResult back = invert(fwd.text, map, shared().function_words,
                                     shared().exceptions, shared().lexicon);
    if (back.text != doc) {
      c.expect(false, "doc " + std::to_string(d) + " did not round trip");
      continue;
    }
    c.expect(back.residue.empty(),
             "doc " + std::to_string(d) + " left " +
                 std::to_string(back.residue.size()) + " residue tokens");
    ++checked;
  }
  c.expect(checked == 50, "only " + std::to_string(checked) + "/50 round-tripped");
  c.expect(c.elapsed() < 10.0, "took " + std::to_string(c.elapsed()) + " s (limit 10 s)");
  CHECK(c.finish());
}

TEST_CASE("criterion 3: determinism") {
  Criterion c(3,
              "two identically seeded cmd_jabberwockify runs emit byte-identical "
              "text and stem map (verified on this host; integer-only sampling "
              "carries the claim across machines)");

  TempDir dir;
  const std::string input = kSourceDir + "/tests/data/preemption.txt";
  for (const char* tag : {"a", "b"}) {
    int exit_code = -1;
    run_cli("--seed 99 jabberwockify " + input + " -o " + dir.file(tag) +
                ".txt --map-out " + dir.file(tag) + ".map.tsv",
            &exit_code);
    c.expect(exit_code == 0,
             std::string("run ") + tag + " exited " + std::to_string(exit_code));
  }
  const std::string text_a = read_file(dir.file("a") + ".txt");
  const std::string text_b = read_file(dir.file("b") + ".txt");
  const std::string map_a = read_file(dir.file("a") + ".map.tsv");
  const std::string map_b = read_file(dir.file("b") + ".map.tsv");
  c.expect(!text_a.empty(), "first run produced no text");
  c.expect(text_a == text_b, "transformed text differs between runs");
  c.expect(map_a == map_b, "stem map differs between runs");
  c.expect(text_a != read_file(input), "text was not actually transformed");
  CHECK(c.finish());
}

TEST_CASE("criterion 4: pseudoword properties") {
  Criterion c(4,
              "10000 generated stems: zero lexicon members, zero character "
              "trigrams absent from the lexicon, all lengths in the configured "
              "window, under 30 s");

  // Independent trigram oracle: every substring trigram of every lexicon
  // word, built by brute force.
  std::unordered_set<std::string> lexicon_trigrams;
  for (const auto& e : shared().lexicon.entries()) {
    for (std::size_t i = 0; i + 3 <= e.word.size(); ++i)
      lexicon_trigrams.insert(e.word.substr(i, 3));
  }
  c.expect(shared().lexicon.size() >= 10000,
           "lexicon holds only " + std::to_string(shared().lexicon.size()) +
               " words");

  const LengthSpec lengths{4, 9};
  SplitMix64 rng(20260821);
  int members = 0, bad_ngrams = 0, bad_lengths = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::string stem =
        generate_stem(shared().model, shared().filter, lengths, rng);
    if (shared().lexicon.contains(stem)) {
      ++members;
      c.expect(false, "lexicon member generated: " + stem);
    }
    const int len = static_cast<int>(stem.size());
    if (len < lengths.min || len > lengths.max) {
      ++bad_lengths;
      c.expect(false, "length " + std::to_string(len) + " out of window: " + stem);
    }
    for (std::size_t k = 0; k + 3 <= stem.size(); ++k) {
      if (!lexicon_trigrams.count(stem.substr(k, 3))) {
        ++bad_ngrams;
        c.expect(false, "novel trigram '" + stem.substr(k, 3) + "' in " + stem);
        break;
      }
    }
  }
  c.expect(members == 0 && bad_ngrams == 0 && bad_lengths == 0,
           "members=" + std::to_string(members) +
               " novel-ngram=" + std::to_string(bad_ngrams) +
               " bad-length=" + std::to_string(bad_lengths));
  c.expect(c.elapsed() < 30.0,
           "took " + std::to_string(c.elapsed()) + " s (limit 30 s)");
  CHECK(c.finish());
}

TEST_CASE("criterion 5: function-word transparency") {
  Criterion c(5,
              "on 1000 random sentences the function-word and numeral token "
              "subsequence is byte-identical across the transform");

  std::mt19937 gen(550);
  auto trace = [](const std::string& text) {
    std::string joined;
    for (const Token& t :
         tokenize(text, shared().function_words, shared().exceptions)) {
      if (t.cls == TokenClass::Function || t.cls == TokenClass::NumeralDigit) {
        joined += t.surface;
        joined += '\x1f';
      }
    }
    return joined;
  };

  for (int i = 0; i < 1000; ++i) {
    const std::string sentence = synth_sentence(gen, true);
    TransformConfig config;
    config.seed = static_cast<std::uint64_t>(i);
    StemMap map(config.seed, config.scope);
    const TransformResult out =
        jabberwockify(sentence, config, shared().ctx(), map);
    if (trace(sentence) != trace(out.text))
      c.expect(false, "subsequence changed for: " + sentence);
  }
  CHECK(c.finish());
}

TEST_CASE("criterion 6: scorer identities") {
  Criterion c(6,
              "cosine self-similarity, symmetry, and positive-scale invariance "
              "hold over 1000 random vectors at stated tolerances");

  std::mt19937_64 gen(66);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::uniform_real_distribution<double> scale_dist(0.001, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t dim = 8 + i % 120;
    std::vector<double> xs(dim), ys(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      xs[k] = dist(gen);
      ys[k] = dist(gen);
    }
    // nudge away from the (measure-zero) all-zero vector
    xs[0] += xs[0] >= 0 ? 0.5 : -0.5;
    ys[0] += ys[0] >= 0 ? 0.5 : -0.5;
    const EmbeddingVector x{xs, "m"}, y{ys, "m"};

    const double self_err = std::abs(cosine(x, x) - 1.0);
    if (self_err > 1e-9)
      c.expect(false, "self-similarity off by " + std::to_string(self_err));

    const double sym_err = std::abs(cosine(x, y) - cosine(y, x));
    if (sym_err > 1e-12)
      c.expect(false, "asymmetry " + std::to_string(sym_err));

    const double a = scale_dist(gen);
    std::vector<double> scaled = xs;
    for (double& v : scaled) v *= a;
    const double scale_err =
        std::abs(cosine(EmbeddingVector{scaled, "m"}, y) - cosine(x, y));
    if (scale_err > 1e-9)
      c.expect(false, "scale variance " + std::to_string(scale_err));
  }
  CHECK(c.finish());
}

TEST_CASE("criterion 7: stub pipeline") {
  Criterion c(7,
              "echo-original translator + local hash embedding score 1.0 "
              "(±1e-6) on every passage, and interrupted runs resume without "
              "duplicates");

  TempDir dir;
  std::mt19937 gen(770);
  std::vector<Passage> passages;
  for (int i = 0; i < 20; ++i)
    passages.push_back({"p" + std::to_string(i), synth_doc(gen)});

  std::atomic<int> translate_calls{0};
  TransformFn transform = [&](const Passage& p, std::uint64_t pseed) {
    TransformConfig config;
    config.seed = pseed;
    StemMap map(config.seed, config.scope);
    return jabberwockify(p.text, config, shared().ctx(), map).text;
  };
  TranslateFn translate = [&](const Passage& p, const std::string&) {
    ++translate_calls;
    return p.text;
  };
  EndpointConfig embed_config;
  embed_config.provider = "stub-hash";
  embed_config.model = "hash-256";
  auto embedder =
      std::shared_ptr<EmbeddingService>(make_embedding_service(embed_config));
  EmbedFn embed = [embedder](const std::string& t) { return embedder->embed(t); };

  RunOptions options;
  options.tmpl = PromptTemplate::load(kSourceDir + "/data/templates/blank.txt");
  options.model_id = "stub";
  options.records_path = dir.file("records.jsonl");
  options.concurrency = 4;
  options.seed = 7;
  options.clock = [] { return std::string("T"); };

  // Simulated interruption: only the first eight passages complete.
  const std::vector<Passage> first(passages.begin(), passages.begin() + 8);
  run_corpus(first, options, transform, translate, embed);
  c.expect(translate_calls == 8,
           "expected 8 initial calls, saw " + std::to_string(translate_calls));

  const auto records = run_corpus(passages, options, transform, translate, embed);
  c.expect(translate_calls == 20,
           "resume re-ran cached passages (calls=" +
               std::to_string(translate_calls) + ")");
  c.expect(records.size() == 20,
           "expected 20 records, got " + std::to_string(records.size()));

  int scored = 0;
  for (const RunRecord& r : records) {
    if (!r.similarity.has_value()) {
      c.expect(false, "passage " + r.passage_id + " has no score: " + r.error);
      continue;
    }
    if (std::abs(*r.similarity - 1.0) > 1e-6)
      c.expect(false, "passage " + r.passage_id + " scored " +
                          std::to_string(*r.similarity));
    ++scored;
  }
  c.expect(scored == 20, "only " + std::to_string(scored) + " scored");

  const auto on_disk = load_records(dir.file("records.jsonl"));
  std::set<std::string> ids;
  for (const auto& r : on_disk) ids.insert(r.id);
  c.expect(on_disk.size() == 20 && ids.size() == 20,
           "record store holds " + std::to_string(on_disk.size()) + " rows, " +
               std::to_string(ids.size()) + " unique");
  CHECK(c.finish());
}

TEST_CASE("criterion 8: agent loop replay") {
  Criterion c(8,
              "scripted chat + bundled game give a byte-deterministic 5-turn "
              "transcript, and 100 fuzzed well-formed turns survive "
              "render/parse round trips");

  TempDir dir;
  auto run_once = [&](const std::string& path) {
    GameSession::Options game_options;
    game_options.clock = [] { return std::string("T"); };
    GameSession session = GameSession::spawn({kStubgame}, game_options);
    std::vector<std::string> replies = {
        "SITUATION: A garden.\nTHOUGHT: Look around.\nCOMMAND: look",
        "SITUATION: Same garden.\nTHOUGHT: The arch leads east.\nCOMMAND: go east",
        "SITUATION: A cellar with a key.\nTHOUGHT: Take it.\nCOMMAND: take key",
        "SITUATION: Key in hand.\nTHOUGHT: Check the pack.\nCOMMAND: inventory",
        "SITUATION: Done here.\nTHOUGHT: Head back.\nCOMMAND: go west",
    };
    std::size_t next = 0;
    ChatFn chat = [&](const std::vector<std::pair<std::string, std::string>>&) {
      REQUIRE(next < replies.size());
      return replies[next++];
    };
    PlayOptions options;
    options.max_turns = 5;
    options.system_prompt = "Play.";
    options.transcript_path = path;
    options.clock = [] { return std::string("T"); };
    return play(session, chat, options);
  };

  const auto turns_a = run_once(dir.file("a.jsonl"));
  const auto turns_b = run_once(dir.file("b.jsonl"));
  c.expect(turns_a.size() == 5,
           "expected 5 turns, got " + std::to_string(turns_a.size()));
  const std::string file_a = read_file(dir.file("a.jsonl"));
  const std::string file_b = read_file(dir.file("b.jsonl"));
  c.expect(!file_a.empty(), "transcript is empty");
  c.expect(file_a == file_b, "replayed transcript differs byte-wise");
  c.expect(std::count(file_a.begin(), file_a.end(), '\n') == 5,
           "transcript does not hold 5 lines");

  // Fuzzed round trips over single-line fields.
  std::mt19937 gen(88);
  const std::vector<std::string> words = {
      "gostak", "doshes", "distims", "vorpal", "tulgey", "key",
      "garden", "north",  "galumph", "\"so\"", "(hm)",   "now!"};
  int bad = 0;
  for (int i = 0; i < 100; ++i) {
    auto phrase = [&](int max_words) {
      std::string out;
      const int n = 1 + static_cast<int>(gen() % max_words);
      for (int k = 0; k < n; ++k) {
        if (k) out += ' ';
        out += words[gen() % words.size()];
      }
      return out;
    };
    AgentTurn t;
    t.situation = phrase(8);
    t.thought = phrase(8);
    t.command = phrase(3);
    const AgentTurn back = parse_turn(render_turn(t));
    if (back.situation != t.situation || back.thought != t.thought ||
        back.command != t.command) {
      ++bad;
      c.expect(false, "round trip changed: " + render_turn(t));
    }
  }
  c.expect(bad == 0, std::to_string(bad) + " fuzzed turns failed");
  CHECK(c.finish());
}

TEST_CASE("criterion 9: live-endpoint replication (informational)") {
  std::printf(
      "[INFO] criterion 9: needs live model endpoints, so it is not asserted "
      "here. README.md section 'Live runbook' shows how to run the real "
      "pipeline; the pinned-vs-unpinned comparison is recorded as labeled "
      "conditions in the same records file, not asserted.\n");
  std::fflush(stdout);
  CHECK(true);
}
