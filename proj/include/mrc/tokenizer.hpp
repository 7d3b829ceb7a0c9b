#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrc/brat.hpp"

namespace mrc {

/// One word-level token with its character span into the source text.
struct Token {
  std::string text;
  CharSpan span;
  bool operator==(const Token&) const = default;
};

/// Whitespace split, then leading/trailing ASCII punctuation peeled off as
/// single-character tokens. Interior punctuation stays ("1.5" is one token).
/// Lossless: every non-whitespace character is covered by exactly one token.
std::vector<Token> tokenize_with_offsets(std::string_view text);

/// Word-to-id map with fixed special tokens. Ids are assigned in insertion
/// order, so building from the same corpus always gives the same table.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;

  Vocabulary();

  int add(const std::string& token);
  int id(const std::string& token) const;  // kUnk when absent
  const std::string& token(int id) const;
  size_t size() const { return tokens_.size(); }

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> ids_;
};

}  // namespace mrc
