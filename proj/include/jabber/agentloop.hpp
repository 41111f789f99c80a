#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace jabber {

// One entry of the raw byte-level exchange with the game process.
struct TranscriptEntry {
  enum class Dir { Game, Player };
  Dir dir;
  std::string text;
  std::string t;  // ISO-8601 timestamp
};

// A child interpreter speaking a line-oriented text protocol on
// stdin/stdout. Output capture stops at the prompt marker (a line that
// is exactly the marker, trailing space allowed) or, for games without a
// stable marker, after a configurable quiet period.
class GameSession {
public:
  struct Options {
    std::string prompt_marker = ">";
    int startup_timeout_ms = 10000;
    int turn_timeout_ms = 10000;
    int quiet_period_ms = 500;
    std::function<std::string()> clock;  // test hook for timestamps
  };

  // Throws GameError on spawn failure or when no prompt shows up within
  // the startup timeout (the error message carries whatever the child
  // printed).
  static GameSession spawn(const std::vector<std::string>& argv,
                           const Options& options);
  static GameSession spawn(const std::vector<std::string>& argv);

  GameSession(GameSession&& other) noexcept;
  GameSession& operator=(GameSession&&) = delete;
  GameSession(const GameSession&) = delete;
  ~GameSession();

  const std::string& banner() const { return banner_; }
  bool ended() const { return ended_; }

  struct StepResult {
    std::string output;
    bool session_ended = false;
  };

  // Writes the command plus newline, captures output up to the next
  // prompt. An empty command is rejected before anything is written.
  // When the game exits, the final output comes back with
  // session_ended set instead of an error.
  StepResult step(const std::string& command);

  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }

  void close();

private:
  GameSession() = default;
  std::string read_until_prompt(int timeout_ms);
  std::string stamp() const;

  Options options_;
  int child_pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  bool ended_ = false;
  bool closed_ = false;
  std::string banner_;
  std::string pending_;  // bytes read past the last prompt
  std::vector<TranscriptEntry> transcript_;
};

struct AgentTurn {
  std::string situation;
  std::string thought;
  std::string command;
  std::string game_output;
};

// Extracts SITUATION/THOUGHT/COMMAND from a model reply. Labels match
// case-insensitively; a leading ">" on a line is tolerated; COMMAND is
// cut at the first newline. A missing or empty COMMAND throws
// ParseError.
AgentTurn parse_turn(std::string_view llm_text);

// Canonical three-line form; parse_turn(render_turn(t)) == t for turns
// whose fields are single trimmed lines.
std::string render_turn(const AgentTurn& turn);

// Chat interface used by the loop: takes (role, content) messages,
// returns the assistant text.
using ChatFn = std::function<std::string(
    const std::vector<std::pair<std::string, std::string>>& messages)>;

struct PlayOptions {
  int max_turns = 10;
  int context_turns = 10;  // how many recent turns the model sees
  std::string system_prompt;
  std::string transcript_path;  // JSONL, empty = don't persist
  std::function<std::string()> clock;
};

// Drives the full loop: build context, query the model, parse, step the
// game, append to the JSONL transcript. One malformed reply per turn is
// retried with a format reminder; a second failure ends the run.
std::vector<AgentTurn> play(GameSession& session, const ChatFn& chat,
                            const PlayOptions& options);

struct LexiconElicitation {
  std::string word;
  std::string definition;
};

struct ElicitResult {
  std::vector<LexiconElicitation> pairs;
  std::vector<std::string> unparsed;  // reply lines kept raw
  std::vector<std::string> warnings;
};

// Single chat call: preamble + transcript + word list; the reply is
// parsed as "word: definition" lines. Words missing from the transcript
// are still queried but flagged. An empty word list asks the model to
// pick salient words itself.
ElicitResult elicit_lexicon(const ChatFn& chat, const std::string& rendered_transcript,
                            const std::vector<std::string>& words,
                            const std::string& preamble);

// The game/player exchange as readable text, also used as elicitation
// context.
std::string render_transcript(const std::vector<TranscriptEntry>& transcript);

}  // namespace jabber
