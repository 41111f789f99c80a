#pragma once

#include <stdexcept>
#include <string>

namespace jabber {

// Base class for everything this library throws on purpose. The cli maps
// subclasses to exit codes, so keep the taxonomy small and stable.
class JabberError : public std::runtime_error {
public:
  explicit JabberError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed user input: bad UTF-8, unreadable files, empty corpora.
class InputError : public JabberError {
public:
  using JabberError::JabberError;
};

// Bad configuration: missing template placeholder, unknown provider,
// unset credential variable, contradictory flags.
class ConfigError : public JabberError {
public:
  using JabberError::JabberError;
};

// A structured reply (agent turn, elicitation line) did not match the
// expected shape after all recovery attempts.
class ParseError : public JabberError {
public:
  using JabberError::JabberError;
};

// The child game process failed to start, died early, or went silent.
class GameError : public JabberError {
public:
  using JabberError::JabberError;
};

// Pseudoword search exhausted its attempt budget without an acceptable
// candidate. Usually means the length window or novelty bar is too tight.
class GenerationError : public JabberError {
public:
  using JabberError::JabberError;
};

// A remote service failed after retries: auth, timeouts, malformed replies.
class RemoteError : public JabberError {
public:
  using JabberError::JabberError;
};

}  // namespace jabber
