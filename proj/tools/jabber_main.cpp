// jabber: one binary for the whole pipeline. Subcommands transform text,
// invert it back, batch-evaluate translations, drive a text game, and
// mint standalone pseudowords. Exit codes: 0 ok, 2 usage/input/config,
// 3 generation exhausted, 4 remote service failed.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "jabber/agentloop.hpp"
#include "jabber/errors.hpp"
#include "jabber/evalharness.hpp"
#include "jabber/pseudogen.hpp"
#include "jabber/rng.hpp"
#include "jabber/stem_map.hpp"
#include "jabber/transform.hpp"
#include "jabber/util.hpp"

namespace {

using namespace jabber;

struct GlobalOpts {
  std::string data_dir = JABBER_DEFAULT_DATA_DIR;
  std::string lexicon_path;
  std::string function_words_path;
  std::string exceptions_path;
  std::uint64_t seed = 0;
  bool verbose = false;

  std::string lexicon_file() const {
    return lexicon_path.empty() ? data_dir + "/lexicon_en.tsv" : lexicon_path;
  }
  std::string function_words_file() const {
    return function_words_path.empty() ? data_dir + "/function_words.txt"
                                       : function_words_path;
  }
  std::string exceptions_file() const {
    return exceptions_path.empty() ? data_dir + "/segment_exceptions.txt"
                                   : exceptions_path;
  }
};

// Everything the transforms need, loaded once up front so a bad path
// fails before any input is touched. The filter keeps a reference to the
// lexicon member, so this type stays pinned in place.
struct Resources {
  Lexicon lexicon;
  WordSet function_words;
  WordSet exceptions;
  CharNgramModel model;
  NoveltyFilter filter;

  Resources(const GlobalOpts& g, int order)
      : lexicon(Lexicon::load_tsv(g.lexicon_file())),
        function_words(WordSet::load(g.function_words_file())),
        exceptions(WordSet::load(g.exceptions_file())),
        model(CharNgramModel::train(lexicon.entries(), order)),
        filter(lexicon) {}
  Resources(const Resources&) = delete;
  Resources& operator=(const Resources&) = delete;
};

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  return read_file(path);
}

void write_output(const std::string& path, std::string_view content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  write_file(path, content);
}

std::vector<std::pair<std::string, std::string>> parse_pairs(
    const std::vector<std::string>& raw, const char* flag) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const std::string& spec : raw) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
      throw ConfigError(std::string(flag) + " wants ORIGINAL=REPLACEMENT, got '" +
                        spec + "'");
    pairs.emplace_back(spec.substr(0, eq), spec.substr(eq + 1));
  }
  return pairs;
}

LogFn make_log(const GlobalOpts& g) {
  if (!g.verbose) return {};
  return [](const std::string& line) { std::cerr << "[remote] " << line << "\n"; };
}

constexpr const char* kFixedTimestamp = "1970-01-01T00:00:00Z";

// ---------------------------------------------------------------------
// jabberwockify
// ---------------------------------------------------------------------

struct JabberwockifyArgs {
  std::string input;
  std::string output;
  std::string map_out;
  std::string map_in;
  double fraction = 1.0;
  std::string scope = "document";
  std::vector<std::string> pins;
  bool replace_digits = false;
  int order = 3;
  bool seed_given = false;
};

int cmd_jabberwockify(const GlobalOpts& g, const JabberwockifyArgs& a) {
  const Resources res(g, a.order);
  const std::string text = read_input(a.input);

  TransformConfig config;
  config.mode = TransformMode::Jabberwocky;
  config.replacement_fraction = a.fraction;
  config.retain_digits = !a.replace_digits;
  config.seed = g.seed;
  config.scope = scope_from_string(a.scope);
  config.pins = parse_pairs(a.pins, "--pin");

  StemMap map(config.seed, config.scope);
  if (!a.map_in.empty()) {
    map = StemMap::load(a.map_in);
    // Continuing a map means continuing its random stream unless the
    // caller explicitly picks a new seed.
    if (!a.seed_given) config.seed = map.seed();
    config.scope = map.scope();
  }

  TransformResult result = jabberwockify(text, config, {res.function_words,
                                         res.exceptions, res.lexicon, res.model,
                                         res.filter},
                                         map);

  // Second pass for pins whose left side is a generated phrase rather
  // than a source word (restoring a meaningful anchor in the output).
  std::string out_text = result.text;
  if (!config.pins.empty()) {
    PinOutcome pinned =
        pin_phrases(out_text, config.pins, res.function_words, res.exceptions);
    out_text = pinned.text;
    for (std::size_t i = 0; i < config.pins.size(); ++i) {
      if (pinned.counts[i] == 0) continue;
      // The forward pass warned about this pin; the phrase pass hit, so
      // drop that warning.
      const std::string suffix = "pin target not found: " + config.pins[i].first;
      std::erase_if(result.warnings,
                    [&](const std::string& w) { return w == suffix; });
    }
  }

  for (const std::string& w : result.warnings) std::cerr << "warning: " << w << "\n";

  write_output(a.output, out_text);

  std::string map_path = a.map_out;
  if (map_path.empty()) {
    if (!a.output.empty() && a.output != "-")
      map_path = a.output + ".map.tsv";
    else if (a.input != "-")
      map_path = a.input + ".map.tsv";
  }
  if (map_path.empty()) {
    std::cerr << "warning: no stem map written (stdin to stdout; pass --map-out)\n";
  } else {
    map.save(map_path);
    if (g.verbose) std::cerr << "stem map: " << map_path << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------
// mask
// ---------------------------------------------------------------------

struct MaskArgs {
  std::string input;
  std::string output;
  double fraction = 1.0;
};

int cmd_mask(const GlobalOpts& g, const MaskArgs& a) {
  const Resources res(g, 3);
  const std::string text = read_input(a.input);

  TransformConfig config;
  config.mode = TransformMode::Blank;
  config.replacement_fraction = a.fraction;
  config.seed = g.seed;

  write_output(a.output, mask(text, config, res.function_words, res.exceptions));
  return 0;
}

// ---------------------------------------------------------------------
// pin
// ---------------------------------------------------------------------

struct PinArgs {
  std::string input;
  std::string output;
  std::vector<std::string> pairs;
};

int cmd_pin(const GlobalOpts& g, const PinArgs& a) {
  const Resources res(g, 3);
  const std::string text = read_input(a.input);
  const auto pairs = parse_pairs(a.pairs, "--pair");

  PinOutcome outcome = pin_phrases(text, pairs, res.function_words, res.exceptions);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::cerr << "pin '" << pairs[i].first << "' -> '" << pairs[i].second
              << "': " << outcome.counts[i] << " replacement"
              << (outcome.counts[i] == 1 ? "" : "s")
              << (outcome.counts[i] == 0 ? " (phrase not found)" : "") << "\n";
  }
  write_output(a.output, outcome.text);
  return 0;
}

// ---------------------------------------------------------------------
// invert
// ---------------------------------------------------------------------

struct InvertArgs {
  std::string input;
  std::string output;
  std::string map_path;
  std::string residue_path;
};

int cmd_invert(const GlobalOpts& g, const InvertArgs& a) {
  const Resources res(g, 3);
  const StemMap map = StemMap::load(a.map_path);
  const std::string text = read_input(a.input);

  InvertResult result =
      invert(text, map, res.function_words, res.exceptions, res.lexicon);
  if (!result.residue.empty()) {
    std::cerr << "warning: " << result.residue.size()
              << " unmapped pseudo-looking token(s) left as-is\n";
  }
  if (!a.residue_path.empty())
    write_file(a.residue_path, residue_report_json(result));
  write_output(a.output, result.text);
  return 0;
}

// ---------------------------------------------------------------------
// genwords
// ---------------------------------------------------------------------

struct GenwordsArgs {
  int count = 0;
  int min_len = 4;
  int max_len = 9;
  int order = 3;
};

int cmd_genwords(const GlobalOpts& g, const GenwordsArgs& a) {
  if (a.count < 0) throw InputError("genwords: count must be >= 0");
  if (a.min_len < 1 || a.max_len < a.min_len)
    throw InputError("genwords: bad length window");
  if (a.count == 0) return 0;

  const Resources res(g, a.order);
  SplitMix64 rng(g.seed);
  std::set<std::string> emitted;
  for (int i = 0; i < a.count; ++i) {
    const std::string stem = generate_stem(
        res.model, res.filter, LengthSpec{a.min_len, a.max_len}, rng,
        [&](const std::string& s) { return emitted.count(s) > 0; });
    emitted.insert(stem);
    std::cout << stem << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------

struct EvalArgs {
  std::string corpus_dir;
  std::string endpoints_path;
  std::string template_path;
  std::string records_path = "records.jsonl";
  std::string mode = "jabberwocky";
  double fraction = 1.0;
  std::string label;
  std::size_t concurrency = 4;
  std::string csv_path;
  std::string svg_path;
  bool fresh = false;
  bool resume = true;
};

int cmd_eval(const GlobalOpts& g, const EvalArgs& a) {
  // Fail fast: endpoints, credentials, and the template are validated
  // before any passage is read or transformed.
  const Endpoints endpoints = Endpoints::load(a.endpoints_path);
  const LogFn log = make_log(g);
  std::shared_ptr<ChatService> chat(make_chat_service(endpoints.chat, log));
  std::shared_ptr<EmbeddingService> embedder(
      make_embedding_service(endpoints.embedding, log));

  if (a.mode != "jabberwocky" && a.mode != "blank" && a.mode != "original")
    throw ConfigError("--mode must be jabberwocky, blank, or original");

  // The default instruction wording has to match what was done to the
  // text, so the blank mode gets its own template; the untransformed
  // baseline keeps the treatment prompt for a like-for-like comparison.
  const std::string default_template =
      a.mode == "blank" ? "blank.txt" : "jabberwocky.txt";
  const std::string template_path =
      a.template_path.empty() ? g.data_dir + "/templates/" + default_template
                              : a.template_path;
  PromptTemplate tmpl = PromptTemplate::load(template_path);
  tmpl.validate();

  const std::vector<Passage> passages = load_corpus_dir(a.corpus_dir);
  if (passages.empty()) throw InputError("corpus is empty: " + a.corpus_dir);

  if (a.fresh) std::remove(a.records_path.c_str());

  std::shared_ptr<Resources> res;
  if (a.mode != "original")
    res = std::make_shared<Resources>(g, 3);

  TransformFn transform;
  if (a.mode == "original") {
    transform = [](const Passage& p, std::uint64_t) { return p.text; };
  } else if (a.mode == "blank") {
    transform = [res, &a](const Passage& p, std::uint64_t passage_seed) {
      TransformConfig config;
      config.mode = TransformMode::Blank;
      config.replacement_fraction = a.fraction;
      config.seed = passage_seed;
      return mask(p.text, config, res->function_words, res->exceptions);
    };
  } else {
    transform = [res, &a](const Passage& p, std::uint64_t passage_seed) {
      TransformConfig config;
      config.mode = TransformMode::Jabberwocky;
      config.replacement_fraction = a.fraction;
      config.seed = passage_seed;
      StemMap map(passage_seed, MapScope::PerDocument);
      return jabberwockify(p.text, config,
                           {res->function_words, res->exceptions, res->lexicon,
                            res->model, res->filter},
                           map)
          .text;
    };
  }

  TranslateFn translate;
  if (endpoints.chat.provider == "stub-echo-original") {
    // Baseline wiring for pipeline checks: the "model" returns the
    // untransformed passage, so scores should be exactly 1.
    translate = [](const Passage& p, const std::string&) { return p.text; };
  } else {
    translate = [chat](const Passage&, const std::string& prompt) {
      return chat->complete(prompt);
    };
  }
  EmbedFn embed = [embedder](const std::string& text) {
    return embedder->embed(text);
  };

  RunOptions options;
  options.tmpl = tmpl;
  options.model_id = chat->model_id();
  options.records_path = a.records_path;
  options.concurrency = a.concurrency;
  options.seed = g.seed;
  options.label = a.label;

  const std::vector<RunRecord> records =
      run_corpus(passages, options, transform, translate, embed);

  int failed = 0;
  for (const RunRecord& r : records)
    if (!r.error.empty()) ++failed;
  if (failed > 0)
    std::cerr << "warning: " << failed << " of " << records.size()
              << " passages failed; details in " << a.records_path << "\n";

  const Report report = summarize(records);
  for (const SummaryRow& row : report.rows) {
    std::printf("%-40s n=%-4d mean=%.4f median=%.4f min=%.4f max=%.4f\n",
                row.condition.c_str(), row.count, row.mean, row.median, row.min,
                row.max);
  }
  for (const auto& [label, mean] : report.markers)
    std::printf("marker %-32s mean=%.4f\n", label.c_str(), mean);

  if (!a.csv_path.empty()) write_file(a.csv_path, report.to_csv());
  if (!a.svg_path.empty()) write_file(a.svg_path, report.to_svg());
  return failed == 0 ? 0 : 4;
}

// ---------------------------------------------------------------------
// report (re-summarize an existing records file)
// ---------------------------------------------------------------------

struct ReportArgs {
  std::string records_path;
  std::string csv_path;
  std::string svg_path;
};

int cmd_report(const ReportArgs& a) {
  const std::vector<RunRecord> records = load_records(a.records_path);
  const Report report = summarize(records);
  for (const SummaryRow& row : report.rows) {
    std::printf("%-40s n=%-4d mean=%.4f median=%.4f min=%.4f max=%.4f\n",
                row.condition.c_str(), row.count, row.mean, row.median, row.min,
                row.max);
  }
  if (!a.csv_path.empty()) write_file(a.csv_path, report.to_csv());
  if (!a.svg_path.empty()) write_file(a.svg_path, report.to_svg());
  return 0;
}

// ---------------------------------------------------------------------
// play
// ---------------------------------------------------------------------

struct PlayArgs {
  std::vector<std::string> game_argv;
  std::string endpoints_path;
  std::string script_path;
  int max_turns = 10;
  int context_turns = 10;
  std::string transcript_path;
  std::string system_template;
  std::vector<std::string> elicit_words;
  bool elicit = false;
  std::string elicit_out;
  bool fixed_time = false;
  std::string marker = ">";
  int startup_timeout_ms = 10000;
  int turn_timeout_ms = 10000;
  int quiet_ms = 500;
};

int cmd_play(const GlobalOpts& g, const PlayArgs& a) {
  if (a.game_argv.empty())
    throw ConfigError("no game command given (put it after --)");

  std::shared_ptr<ChatService> chat_svc;
  if (!a.script_path.empty()) {
    EndpointConfig cfg;
    cfg.provider = "script";
    cfg.script_path = a.script_path;
    cfg.model = "scripted";
    chat_svc = make_chat_service(cfg, make_log(g));
  } else if (!a.endpoints_path.empty()) {
    const Endpoints endpoints = Endpoints::load(a.endpoints_path);
    chat_svc = make_chat_service(endpoints.chat, make_log(g));
  } else {
    throw ConfigError("play needs --endpoints or --script");
  }

  const std::string system_path = a.system_template.empty()
                                      ? g.data_dir + "/templates/agent_system.txt"
                                      : a.system_template;
  const std::string system_prompt = read_file(system_path);

  ChatFn chat = [chat_svc](
                    const std::vector<std::pair<std::string, std::string>>& msgs) {
    std::ostringstream prompt;
    for (const auto& [role, content] : msgs)
      prompt << "[" << role << "]\n" << content << "\n\n";
    return chat_svc->complete(prompt.str());
  };

  GameSession::Options session_options;
  session_options.prompt_marker = a.marker;
  session_options.startup_timeout_ms = a.startup_timeout_ms;
  session_options.turn_timeout_ms = a.turn_timeout_ms;
  session_options.quiet_period_ms = a.quiet_ms;
  if (a.fixed_time)
    session_options.clock = [] { return std::string(kFixedTimestamp); };

  GameSession session = GameSession::spawn(a.game_argv, session_options);
  std::cout << "=== GAME ===\n" << session.banner() << "\n";

  PlayOptions play_options;
  play_options.max_turns = a.max_turns;
  play_options.context_turns = a.context_turns;
  play_options.system_prompt = system_prompt;
  play_options.transcript_path = a.transcript_path;
  play_options.clock = session_options.clock;

  const std::vector<AgentTurn> turns = play(session, chat, play_options);
  for (std::size_t i = 0; i < turns.size(); ++i) {
    std::cout << "--- turn " << i << " ---\n"
              << render_turn(turns[i]) << "=== GAME ===\n"
              << turns[i].game_output << "\n";
  }

  if (a.elicit || !a.elicit_words.empty()) {
    const std::string preamble =
        read_file(g.data_dir + "/templates/elicit_preamble.txt");
    const ElicitResult result = elicit_lexicon(
        chat, render_transcript(session.transcript()), a.elicit_words, preamble);

    for (const std::string& w : result.warnings)
      std::cerr << "warning: " << w << "\n";

    std::size_t width = 4;
    for (const auto& p : result.pairs) width = std::max(width, p.word.size());
    std::cout << "=== LEXICON ===\n";
    for (const auto& p : result.pairs) {
      std::cout << p.word << std::string(width - p.word.size() + 2, ' ')
                << p.definition << "\n";
    }
    for (const std::string& line : result.unparsed)
      std::cout << "(unparsed) " << line << "\n";

    nlohmann::json j = nlohmann::json::array();
    for (const auto& p : result.pairs)
      j.push_back({{"word", p.word}, {"definition", p.definition}});
    nlohmann::json doc;
    doc["definitions"] = j;
    doc["unparsed"] = result.unparsed;
    if (!a.elicit_out.empty())
      write_file(a.elicit_out, doc.dump(2) + "\n");
    else
      std::cout << doc.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jabberwockification toolkit: turn prose into pronounceable "
               "nonsense, reverse it, and measure what survives."};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--data-dir", g.data_dir, "Directory with bundled data files")
      ->capture_default_str();
  app.add_option("--lexicon", g.lexicon_path,
                 "Word frequency TSV (default: <data-dir>/lexicon_en.tsv)");
  app.add_option("--function-words", g.function_words_path,
                 "Function word list (default: <data-dir>/function_words.txt)");
  app.add_option("--exceptions", g.exceptions_path,
                 "Segmentation exception list (default: "
                 "<data-dir>/segment_exceptions.txt)");
  auto* seed_opt =
      app.add_option("--seed", g.seed, "Seed for every random choice")
          ->capture_default_str();
  app.add_flag("-v,--verbose", g.verbose, "Chatty progress on stderr");

  // jabberwockify ------------------------------------------------------
  JabberwockifyArgs ja;
  CLI::App* jw = app.add_subcommand(
      "jabberwockify", "Replace content words with seeded pseudowords");
  jw->add_option("input", ja.input, "Input text file, - for stdin")->required();
  jw->add_option("-o,--output", ja.output, "Output file (default stdout)");
  jw->add_option("--map-out", ja.map_out,
                 "Stem map file (default: <output>.map.tsv)");
  jw->add_option("--map-in", ja.map_in,
                 "Existing stem map to extend (corpus-consistent naming)");
  jw->add_option("--fraction", ja.fraction,
                 "Fraction of content stems to replace, 0..1")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  jw->add_option("--scope", ja.scope, "Map scope: document or corpus")
      ->check(CLI::IsMember({"document", "corpus"}))
      ->capture_default_str();
  jw->add_option("--pin", ja.pins,
                 "ORIGINAL=REPLACEMENT forced substitution, repeatable");
  jw->add_flag("--replace-digits", ja.replace_digits,
               "Also pseudonymize digit strings (kept verbatim by default)");
  jw->add_option("--order", ja.order, "Character n-gram order")
      ->check(CLI::Range(2, 5))
      ->capture_default_str();

  // mask ---------------------------------------------------------------
  MaskArgs ma;
  CLI::App* mk =
      app.add_subcommand("mask", "Replace content words with BLANK");
  mk->add_option("input", ma.input, "Input text file, - for stdin")->required();
  mk->add_option("-o,--output", ma.output, "Output file (default stdout)");
  mk->add_option("--fraction", ma.fraction,
                 "Fraction of content stems to mask, 0..1")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  // pin ----------------------------------------------------------------
  PinArgs pa;
  CLI::App* pn = app.add_subcommand(
      "pin", "Substitute phrases in transformed text (counts on stderr)");
  pn->add_option("input", pa.input, "Transformed text file, - for stdin")
      ->required();
  pn->add_option("-o,--output", pa.output, "Output file (default stdout)");
  pn->add_option("--pair", pa.pairs, "PHRASE=REPLACEMENT, repeatable")
      ->required();

  // invert -------------------------------------------------------------
  InvertArgs ia;
  CLI::App* iv = app.add_subcommand(
      "invert", "Map pseudowords back to the originals via a stem map");
  iv->add_option("input", ia.input, "Transformed text file, - for stdin")
      ->required();
  iv->add_option("--map", ia.map_path, "Stem map written by jabberwockify")
      ->required();
  iv->add_option("-o,--output", ia.output, "Output file (default stdout)");
  iv->add_option("--residue", ia.residue_path,
                 "Write unmapped-token report as JSON here");

  // genwords -----------------------------------------------------------
  GenwordsArgs ga;
  CLI::App* gw = app.add_subcommand(
      "genwords", "Print N fresh pseudowords, one per line");
  gw->add_option("count", ga.count, "How many words")->required();
  gw->add_option("--min-len", ga.min_len, "Minimum length")
      ->capture_default_str();
  gw->add_option("--max-len", ga.max_len, "Maximum length")
      ->capture_default_str();
  gw->add_option("--order", ga.order, "Character n-gram order")
      ->check(CLI::Range(2, 5))
      ->capture_default_str();

  // eval ---------------------------------------------------------------
  EvalArgs ea;
  CLI::App* ev = app.add_subcommand(
      "eval", "Transform a corpus, collect translations, score similarity");
  ev->add_option("corpus", ea.corpus_dir, "Directory of .txt passages")
      ->required();
  ev->add_option("--endpoints", ea.endpoints_path,
                 "Endpoint config JSON (chat + embedding)")
      ->required();
  ev->add_option("--template", ea.template_path,
                 "Prompt template (default: picked to match --mode)");
  ev->add_option("--records", ea.records_path, "JSONL record store")
      ->capture_default_str();
  ev->add_option("--mode", ea.mode, "jabberwocky, blank, or original")
      ->check(CLI::IsMember({"jabberwocky", "blank", "original"}))
      ->capture_default_str();
  ev->add_option("--fraction", ea.fraction, "Replacement fraction, 0..1")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  ev->add_option("--label", ea.label,
                 "Condition tag stored on records and drawn as a chart marker");
  ev->add_option("--concurrency", ea.concurrency, "Parallel passages")
      ->check(CLI::Range(1, 64))
      ->capture_default_str();
  ev->add_option("--csv", ea.csv_path, "Write histogram CSV here");
  ev->add_option("--svg", ea.svg_path, "Write score chart SVG here");
  ev->add_flag("--fresh", ea.fresh, "Delete the record store first");
  ev->add_flag("--resume", ea.resume,
               "Reuse scored records, retry failed ones (default behavior)");

  // report -------------------------------------------------------------
  ReportArgs ra;
  CLI::App* rp = app.add_subcommand(
      "report", "Summarize an existing records file without running anything");
  rp->add_option("records", ra.records_path, "JSONL record store")->required();
  rp->add_option("--csv", ra.csv_path, "Write histogram CSV here");
  rp->add_option("--svg", ra.svg_path, "Write score chart SVG here");

  // play ---------------------------------------------------------------
  PlayArgs pla;
  CLI::App* pl = app.add_subcommand(
      "play", "Let a model play a text game; game command goes after --");
  pl->add_option("--endpoints", pla.endpoints_path, "Endpoint config JSON");
  pl->add_option("--script", pla.script_path,
                 "Canned replies (JSON array) instead of a live model");
  pl->add_option("--max-turns", pla.max_turns, "Turn budget")
      ->check(CLI::Range(1, 1000))
      ->capture_default_str();
  pl->add_option("--context-turns", pla.context_turns,
                 "Recent turns shown to the model")
      ->capture_default_str();
  pl->add_option("--transcript", pla.transcript_path,
                 "Write turn-by-turn JSONL here");
  pl->add_option("--system-template", pla.system_template,
                 "Protocol prompt (default: <data-dir>/templates/agent_system.txt)");
  pl->add_option("--elicit-word", pla.elicit_words,
                 "After play, ask for this word's definition; repeatable");
  pl->add_flag("--elicit", pla.elicit,
               "After play, let the model pick and define salient words");
  pl->add_option("--elicit-out", pla.elicit_out,
                 "Write the definitions JSON here instead of stdout");
  pl->add_flag("--fixed-time", pla.fixed_time,
               "Stamp transcripts with a fixed epoch time (reproducible runs)");
  pl->add_option("--marker", pla.marker, "Game prompt marker line")
      ->capture_default_str();
  pl->add_option("--startup-timeout-ms", pla.startup_timeout_ms,
                 "How long to wait for the first prompt")
      ->capture_default_str();
  pl->add_option("--turn-timeout-ms", pla.turn_timeout_ms,
                 "Per-turn output deadline")
      ->capture_default_str();
  pl->add_option("--quiet-ms", pla.quiet_ms,
                 "Silence treated as end-of-reply when no marker shows")
      ->capture_default_str();
  pl->add_option("game", pla.game_argv,
                 "Game interpreter command line (verbatim, after --)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (jw->parsed()) {
      ja.seed_given = seed_opt->count() > 0;
      return cmd_jabberwockify(g, ja);
    }
    if (mk->parsed()) return cmd_mask(g, ma);
    if (pn->parsed()) return cmd_pin(g, pa);
    if (iv->parsed()) return cmd_invert(g, ia);
    if (gw->parsed()) return cmd_genwords(g, ga);
    if (ev->parsed()) return cmd_eval(g, ea);
    if (rp->parsed()) return cmd_report(ra);
    if (pl->parsed()) return cmd_play(g, pla);
  } catch (const RemoteError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const GenerationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const JabberError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
