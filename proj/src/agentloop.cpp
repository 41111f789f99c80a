#include "jabber/agentloop.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>

#include "jabber/errors.hpp"
#include "jabber/util.hpp"

namespace jabber {

namespace {

// True if the buffer currently ends in a prompt: its last (possibly
// unterminated) line is exactly the marker, with one trailing space
// allowed.
bool ends_at_prompt(const std::string& buf, const std::string& marker) {
  if (buf.empty()) return false;
  std::size_t line_start = buf.rfind('\n');
  line_start = line_start == std::string::npos ? 0 : line_start + 1;
  std::string_view line(buf.data() + line_start, buf.size() - line_start);
  if (!line.empty() && line.back() == ' ') line.remove_suffix(1);
  return !line.empty() && line == marker;
}

// Strips the prompt line off the end of a captured chunk.
std::string without_prompt(const std::string& buf) {
  std::size_t line_start = buf.rfind('\n');
  line_start = line_start == std::string::npos ? 0 : line_start + 1;
  return buf.substr(0, line_start);
}

}  // namespace

GameSession GameSession::spawn(const std::vector<std::string>& argv,
                               const Options& options) {
  if (argv.empty()) throw InputError("spawn_game: empty command line");

  // A game can die between our EOF check and the next write; without
  // this the resulting SIGPIPE would kill the whole process instead of
  // surfacing as a step error.
  signal(SIGPIPE, SIG_IGN);

  int in_pipe[2];   // parent -> child stdin
  int out_pipe[2];  // child stdout -> parent
  int err_pipe[2];  // exec failure reporting
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0 || pipe(err_pipe) != 0)
    throw GameError("spawn_game: pipe() failed");
  fcntl(err_pipe[1], F_SETFD, FD_CLOEXEC);

  const pid_t pid = fork();
  if (pid < 0) throw GameError("spawn_game: fork() failed");

  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(out_pipe[1], STDERR_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[0]);

    std::vector<char*> cargv;
    for (const std::string& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);
    execvp(cargv[0], cargv.data());
    // Only reached when exec failed; report errno through the CLOEXEC
    // pipe so the parent can tell "bad executable" from "silent game".
    const int err = errno;
    ssize_t ignored = write(err_pipe[1], &err, sizeof err);
    (void)ignored;
    _exit(127);
  }

  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);

  int exec_errno = 0;
  if (read(err_pipe[0], &exec_errno, sizeof exec_errno) == sizeof exec_errno) {
    ::close(err_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    waitpid(pid, nullptr, 0);
    throw GameError(std::string("spawn_game: cannot execute '") + argv[0] +
                    "': " + std::strerror(exec_errno));
  }
  ::close(err_pipe[0]);

  GameSession session;
  session.options_ = options;
  session.child_pid_ = pid;
  session.to_child_ = in_pipe[1];
  session.from_child_ = out_pipe[0];
  fcntl(session.from_child_, F_SETFL, O_NONBLOCK);

  try {
    session.banner_ = session.read_until_prompt(options.startup_timeout_ms);
  } catch (const GameError& e) {
    const std::string partial = session.pending_;
    session.close();
    throw GameError(std::string("spawn_game: no prompt at startup: ") + e.what() +
                    (partial.empty() ? "" : "; output so far: " + partial));
  }
  session.transcript_.push_back(
      {TranscriptEntry::Dir::Game, session.banner_, session.stamp()});
  return session;
}

GameSession GameSession::spawn(const std::vector<std::string>& argv) {
  return spawn(argv, Options{});
}

GameSession::GameSession(GameSession&& other) noexcept
    : options_(std::move(other.options_)),
      child_pid_(other.child_pid_),
      to_child_(other.to_child_),
      from_child_(other.from_child_),
      ended_(other.ended_),
      closed_(other.closed_),
      banner_(std::move(other.banner_)),
      pending_(std::move(other.pending_)),
      transcript_(std::move(other.transcript_)) {
  other.child_pid_ = -1;
  other.to_child_ = -1;
  other.from_child_ = -1;
  other.closed_ = true;
}

GameSession::~GameSession() { close(); }

std::string GameSession::stamp() const {
  return options_.clock ? options_.clock() : iso8601_now();
}

std::string GameSession::read_until_prompt(int timeout_ms) {
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + std::chrono::milliseconds(timeout_ms);
  auto last_data = clock::now();
  std::string& buf = pending_;

  while (true) {
    if (ends_at_prompt(buf, options_.prompt_marker)) {
      std::string output = without_prompt(buf);
      buf.clear();
      return output;
    }

    const auto now = clock::now();
    if (now >= deadline)
      throw GameError("timed out waiting for the game prompt");
    // Quiet-period fallback: output arrived, then silence, and no marker
    // in sight. Treat what we have as the complete reply.
    const auto quiet = std::chrono::duration_cast<std::chrono::milliseconds>(
                           now - last_data)
                           .count();
    if (!buf.empty() && quiet >= options_.quiet_period_ms) {
      std::string output = buf;
      buf.clear();
      return output;
    }

    struct pollfd pfd{from_child_, POLLIN, 0};
    const int wait_ms = static_cast<int>(std::min<long long>(
        50, std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now)
                .count()));
    const int ready = poll(&pfd, 1, std::max(1, wait_ms));
    if (ready <= 0) continue;

    char chunk[4096];
    const ssize_t n = read(from_child_, chunk, sizeof chunk);
    if (n > 0) {
      buf.append(chunk, static_cast<std::size_t>(n));
      last_data = clock::now();
      continue;
    }
    if (n == 0) {  // EOF: the game is gone
      ended_ = true;
      std::string output = buf;
      buf.clear();
      return output;
    }
    if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
    throw GameError(std::string("read from game failed: ") + std::strerror(errno));
  }
}

GameSession::StepResult GameSession::step(const std::string& command) {
  if (trim(command).empty())
    throw InputError("step: refusing to send an empty command");
  if (ended_ || closed_) throw GameError("step: session already ended");

  const std::string line = command + "\n";
  if (write(to_child_, line.data(), line.size()) !=
      static_cast<ssize_t>(line.size())) {
    ended_ = true;
    throw GameError("step: write to game failed (process gone?)");
  }
  transcript_.push_back({TranscriptEntry::Dir::Player, command, stamp()});

  std::string output = read_until_prompt(options_.turn_timeout_ms);
  transcript_.push_back({TranscriptEntry::Dir::Game, output, stamp()});
  return {std::move(output), ended_};
}

void GameSession::close() {
  if (closed_) return;
  closed_ = true;
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (child_pid_ > 0) {
    // Give it a moment to exit on its own after stdin closed.
    int status = 0;
    for (int i = 0; i < 20; ++i) {
      if (waitpid(child_pid_, &status, WNOHANG) != 0) {
        child_pid_ = -1;
        break;
      }
      usleep(10000);
    }
    if (child_pid_ > 0) {
      kill(child_pid_, SIGKILL);
      waitpid(child_pid_, &status, 0);
    }
  }
}

AgentTurn parse_turn(std::string_view llm_text) {
  AgentTurn turn;
  bool saw_command = false;
  // 0 = situation, 1 = thought, -1 = none; unlabeled lines continue the
  // current multi-line field.
  int current = -1;
  std::string* fields[2] = {&turn.situation, &turn.thought};

  for (std::string line : split_lines(llm_text)) {
    std::string work = trim(line);
    while (!work.empty() && work.front() == '>') work = trim(work.substr(1));
    const std::string upper = ascii_upper(work);

    auto label_payload = [&](const char* label) -> std::optional<std::string> {
      const std::size_t len = std::strlen(label);
      if (upper.rfind(label, 0) != 0) return std::nullopt;
      std::string rest = work.substr(len);
      const std::string rest_trim = trim(rest);
      if (!rest_trim.empty() && rest_trim.front() == ':')
        return trim(rest_trim.substr(1));
      if (rest.empty() || rest.front() == ':') return trim(rest);
      return std::nullopt;  // e.g. "situations" is not the label
    };

    if (auto p = label_payload("SITUATION")) {
      turn.situation = *p;
      current = 0;
    } else if (auto p = label_payload("THOUGHT")) {
      turn.thought = *p;
      current = 1;
    } else if (auto p = label_payload("COMMAND")) {
      // Only the first line counts; anything after a newline is chatter.
      if (!saw_command) {
        turn.command = *p;
        saw_command = true;
      }
      current = -1;
    } else if (current >= 0 && !work.empty()) {
      std::string& field = *fields[current];
      if (!field.empty()) field += ' ';
      field += work;
    }
  }

  if (!saw_command)
    throw ParseError("reply has no COMMAND line");
  if (turn.command.empty())
    throw ParseError("COMMAND line is empty");
  return turn;
}

std::string render_turn(const AgentTurn& turn) {
  return "SITUATION: " + turn.situation + "\nTHOUGHT: " + turn.thought +
         "\nCOMMAND: " + turn.command + "\n";
}

namespace {

constexpr const char* kFormatReminder =
    "Your last reply could not be parsed. Answer again using exactly three "
    "lines:\nSITUATION: ...\nTHOUGHT: ...\nCOMMAND: ...";

std::string context_message(const std::string& banner,
                            const std::vector<AgentTurn>& turns,
                            int context_turns, const std::string& latest_output) {
  std::ostringstream out;
  out << "GAME BANNER:\n" << banner << "\n";
  const std::size_t k = static_cast<std::size_t>(std::max(0, context_turns));
  const std::size_t start = turns.size() > k ? turns.size() - k : 0;
  for (std::size_t i = start; i < turns.size(); ++i) {
    out << "\n" << render_turn(turns[i]);
    out << "GAME OUTPUT:\n" << turns[i].game_output << "\n";
  }
  out << "\nLATEST GAME OUTPUT:\n" << latest_output << "\nYour turn.";
  return out.str();
}

}  // namespace

std::vector<AgentTurn> play(GameSession& session, const ChatFn& chat,
                            const PlayOptions& options) {
  if (options.max_turns < 1) throw InputError("play: max_turns must be >= 1");
  std::function<std::string()> now = options.clock;
  if (!now) now = [] { return iso8601_now(); };

  std::ofstream log;
  if (!options.transcript_path.empty()) {
    log.open(options.transcript_path, std::ios::trunc | std::ios::binary);
    if (!log) throw InputError("cannot open transcript file: " + options.transcript_path);
  }
  auto persist = [&](int index, const AgentTurn& t) {
    if (!log.is_open()) return;
    nlohmann::json j;
    j["turn_index"] = index;
    j["situation"] = t.situation;
    j["thought"] = t.thought;
    j["command"] = t.command;
    j["game_output"] = t.game_output;
    j["t"] = now();
    log << j.dump() << '\n';
    log.flush();
  };

  std::vector<AgentTurn> turns;
  std::string latest_output = session.banner();

  for (int turn_index = 0; turn_index < options.max_turns; ++turn_index) {
    std::vector<std::pair<std::string, std::string>> messages;
    messages.emplace_back("system", options.system_prompt);
    messages.emplace_back(
        "user", context_message(session.banner(), turns, options.context_turns,
                                latest_output));

    AgentTurn turn;
    try {
      turn = parse_turn(chat(messages));
    } catch (const ParseError&) {
      // One retry with an explicit format reminder, then give up on the
      // run but keep what we have.
      messages.emplace_back("user", kFormatReminder);
      try {
        turn = parse_turn(chat(messages));
      } catch (const ParseError& e2) {
        AgentTurn aborted;
        aborted.situation = "(aborted)";
        aborted.thought = std::string("unparseable model reply: ") + e2.what();
        aborted.command = "(none)";
        persist(turn_index, aborted);
        break;
      }
    }

    const GameSession::StepResult result = session.step(turn.command);
    turn.game_output = result.output;
    turns.push_back(turn);
    persist(turn_index, turn);
    latest_output = result.output;
    if (result.session_ended) break;
  }
  return turns;
}

std::string render_transcript(const std::vector<TranscriptEntry>& transcript) {
  std::ostringstream out;
  for (const TranscriptEntry& e : transcript) {
    out << (e.dir == TranscriptEntry::Dir::Game ? "GAME: " : "PLAYER: ") << e.text
        << "\n";
  }
  return out.str();
}

ElicitResult elicit_lexicon(const ChatFn& chat, const std::string& rendered_transcript,
                            const std::vector<std::string>& words,
                            const std::string& preamble) {
  if (rendered_transcript.empty())
    throw InputError("elicit_lexicon: empty transcript");

  ElicitResult result;
  std::ostringstream prompt;
  prompt << preamble << "\n--- TRANSCRIPT ---\n" << rendered_transcript
         << "--- END TRANSCRIPT ---\n\n";
  if (words.empty()) {
    prompt << "No word list was given. Choose the most salient invented words "
              "from the transcript yourself and define each.\n";
  } else {
    prompt << "Words to define:\n";
    for (const std::string& w : words) {
      if (rendered_transcript.find(w) == std::string::npos)
        result.warnings.push_back("word not seen in transcript: " + w);
      prompt << "- " << w << "\n";
    }
  }

  const std::string reply = chat({{"user", prompt.str()}});
  for (const std::string& raw : split_lines(reply)) {
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos || colon == 0) {
      result.unparsed.push_back(line);
      continue;
    }
    std::string word = trim(line.substr(0, colon));
    // Tolerate list markers in front of the word.
    while (!word.empty() && (word.front() == '-' || word.front() == '*'))
      word = trim(word.substr(1));
    const std::string def = trim(line.substr(colon + 1));
    if (word.empty() || def.empty() || word.find(' ') != std::string::npos) {
      result.unparsed.push_back(line);
      continue;
    }
    result.pairs.push_back({word, def});
  }
  return result;
}

}  // namespace jabber
