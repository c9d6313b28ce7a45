//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#include "paccmann/smiles/token.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace paccmann::smiles {

namespace {

bool is_single_char_token(char c) {
  switch (c) {
    case 'B': case 'C': case 'N': case 'O': case 'P': case 'S':
    case 'F': case 'I':
    case 'b': case 'c': case 'n': case 'o': case 'p': case 's':
    case '(': case ')': case '=': case '#': case '-': case ':':
    case '/': case '\\': case '.':
      return true;
    default:
      return c >= '0' && c <= '9';
  }
}

}  // namespace

std::vector<PositionedToken> tokenize_with_positions(std::string_view s) {
  if (s.empty()) throw IllegalCharacter("empty SMILES string", 0);
  std::vector<PositionedToken> out;
  out.reserve(s.size());
  std::vector<size_t> paren_stack;
  size_t i = 0;
  const size_t n = s.size();
  while (i < n) {
    char c = s[i];
    if (static_cast<unsigned char>(c) >= 0x80) {
      throw IllegalCharacter("non-ASCII byte in SMILES", i);
    }
    if (c == '[') {
      size_t j = s.find(']', i);
      if (j == std::string_view::npos) {
        throw UnbalancedBracket("unclosed '[' in SMILES", i);
      }
      out.push_back({std::string(s.substr(i, j - i + 1)), i});
      i = j + 1;
    } else if (c == ']') {
      throw UnbalancedBracket("']' without matching '['", i);
    } else if (c == '%') {
      if (i + 2 >= n || !std::isdigit(static_cast<unsigned char>(s[i + 1])) ||
          !std::isdigit(static_cast<unsigned char>(s[i + 2]))) {
        throw IllegalCharacter("'%' must be followed by two digits", i);
      }
      out.push_back({std::string(s.substr(i, 3)), i});
      i += 3;
    } else if (c == 'C' && i + 1 < n && s[i + 1] == 'l') {
      out.push_back({"Cl", i});
      i += 2;
    } else if (c == 'B' && i + 1 < n && s[i + 1] == 'r') {
      out.push_back({"Br", i});
      i += 2;
    } else if (is_single_char_token(c)) {
      if (c == '(') {
        paren_stack.push_back(i);
      } else if (c == ')') {
        if (paren_stack.empty()) {
          throw UnbalancedBracket("')' without matching '('", i);
        }
        paren_stack.pop_back();
      }
      out.push_back({std::string(1, c), i});
      ++i;
    } else {
      throw IllegalCharacter(std::string("illegal character '") + c +
                                 "' in SMILES",
                             i);
    }
  }
  if (!paren_stack.empty()) {
    throw UnbalancedBracket("unclosed '(' in SMILES", paren_stack.back());
  }
  return out;
}

std::vector<Token> tokenize(std::string_view s) {
  auto positioned = tokenize_with_positions(s);
  std::vector<Token> out;
  out.reserve(positioned.size());
  for (auto& p : positioned) out.push_back(std::move(p.text));
  return out;
}

TokenDictionary::TokenDictionary() : TokenDictionary(std::vector<Token>{}) {}

TokenDictionary::TokenDictionary(const std::vector<Token>& distinct_tokens) {
  by_index_ = {kPadText, kUnkText};
  std::vector<Token> sorted = distinct_tokens;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (auto& t : sorted) by_index_.push_back(t);
  for (size_t i = 0; i < by_index_.size(); ++i) {
    entries_[by_index_[i]] = static_cast<int>(i);
  }
}

int TokenDictionary::index_of(const Token& t) const {
  auto it = entries_.find(t);
  return it == entries_.end() ? kUnk : it->second;
}

const Token& TokenDictionary::token_at(int index) const {
  return by_index_.at(static_cast<size_t>(index));
}

TokenDictionary build_dictionary(const std::vector<std::string>& corpus) {
  if (corpus.empty()) throw EmptyCorpus("token dictionary needs a non-empty corpus");
  std::set<Token> distinct;
  for (const auto& s : corpus) {
    for (auto& t : tokenize(s)) distinct.insert(std::move(t));
  }
  return TokenDictionary(std::vector<Token>(distinct.begin(), distinct.end()));
}

EncodedSequence encode_tokens(const std::vector<Token>& tokens,
                              const TokenDictionary& dict, int max_len) {
  if (static_cast<int>(tokens.size()) > max_len) {
    throw SequenceTooLong("sequence of " + std::to_string(tokens.size()) +
                          " tokens exceeds max length " +
                          std::to_string(max_len));
  }
  EncodedSequence enc;
  enc.indices.assign(static_cast<size_t>(max_len), TokenDictionary::kPad);
  enc.mask.assign(static_cast<size_t>(max_len), 0);
  for (size_t i = 0; i < tokens.size(); ++i) {
    enc.indices[i] = dict.index_of(tokens[i]);
    enc.mask[i] = 1;
  }
  return enc;
}

}  // namespace paccmann::smiles
