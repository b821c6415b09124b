#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace syntrans {

/// Base class for errors caused by bad input: config files, token
/// sequences, prediction files, corpora. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GrammarError : public Error {
 public:
  using Error::Error;
};

/// A (lemma, category, features) key with no lexicon entry.
class LexiconGapError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// A StructureSpec that violates its own constraints or is unsupported by a
/// grammar.
class SpecError : public Error {
 public:
  using Error::Error;
};

class WrongTaskError : public Error {
 public:
  using Error::Error;
};

/// An oracle cannot apply to its input (no auxiliary, too few noun phrases).
class TransformError : public Error {
 public:
  using Error::Error;
};

class InsufficientLexiconError : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  AlignmentError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// An internal invariant failed. Always a bug; exit code 3.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace syntrans
