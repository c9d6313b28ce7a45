//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "paccmann/common/error.hpp"

namespace paccmann::smiles {

/// One atom, bond, branch, ring-closure or stereo symbol. Multi-character
/// atoms (Cl, Br), bracket expressions ([NH2+]) and two-digit ring closures
/// (%12) are single tokens; concatenating the tokens of a string reproduces
/// it exactly.
using Token = std::string;

class UnbalancedBracket : public common::InputError {
 public:
  UnbalancedBracket(const std::string& what, size_t position)
      : InputError(what), position(position) {}
  size_t position;
};

class IllegalCharacter : public common::InputError {
 public:
  IllegalCharacter(const std::string& what, size_t position)
      : InputError(what), position(position) {}
  size_t position;
};

class SequenceTooLong : public common::InputError {
 public:
  using InputError::InputError;
};

class EmptyCorpus : public common::InputError {
 public:
  using InputError::InputError;
};

std::vector<Token> tokenize(std::string_view s);

/// Token with its byte offset in the source string, for error reporting.
struct PositionedToken {
  Token text;
  size_t position;
};

std::vector<PositionedToken> tokenize_with_positions(std::string_view s);

/// Dense token -> index mapping with two reserved entries. Deterministic for
/// a given corpus: reserved entries first, then distinct tokens in
/// lexicographic order.
class TokenDictionary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr const char* kPadText = "<pad>";
  static constexpr const char* kUnkText = "<unk>";

  TokenDictionary();
  explicit TokenDictionary(const std::vector<Token>& distinct_tokens);

  int index_of(const Token& t) const;  // kUnk when absent
  const Token& token_at(int index) const;
  bool contains(const Token& t) const { return entries_.count(t) > 0; }
  int size() const { return static_cast<int>(by_index_.size()); }

  const std::vector<Token>& tokens() const { return by_index_; }

 private:
  std::map<Token, int> entries_;
  std::vector<Token> by_index_;
};

TokenDictionary build_dictionary(const std::vector<std::string>& corpus);

struct EncodedSequence {
  std::vector<int> indices;    // length T, PAD-filled tail
  std::vector<uint8_t> mask;   // true exactly on real tokens
};

EncodedSequence encode_tokens(const std::vector<Token>& tokens,
                              const TokenDictionary& dict, int max_len);

}  // namespace paccmann::smiles
