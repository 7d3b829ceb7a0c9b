#include "mrc/tokenizer.hpp"

#include <cctype>

#include "mrc/errors.hpp"

namespace mrc {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<Token> tokenize_with_offsets(std::string_view text) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    size_t chunk_end = i;
    while (chunk_end < text.size() && !is_space(text[chunk_end])) ++chunk_end;

    size_t s = i, e = chunk_end;
    while (s < e && is_punct(text[s])) {
      out.push_back({std::string(text.substr(s, 1)), {s, s + 1}});
      ++s;
    }
    size_t tail = e;
    while (tail > s && is_punct(text[tail - 1])) --tail;
    if (s < tail) out.push_back({std::string(text.substr(s, tail - s)), {s, tail}});
    for (size_t p = tail; p < e; ++p)
      out.push_back({std::string(text.substr(p, 1)), {p, p + 1}});
    i = chunk_end;
  }
  return out;
}

Vocabulary::Vocabulary() {
  for (const char* t : {"[PAD]", "[UNK]", "[CLS]", "[SEP]"}) add(t);
}

int Vocabulary::add(const std::string& token) {
  auto it = ids_.find(token);
  if (it != ids_.end()) return it->second;
  int new_id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  ids_[token] = new_id;
  return new_id;
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int token_id) const {
  if (token_id < 0 || token_id >= static_cast<int>(tokens_.size()))
    throw InputError("token id " + std::to_string(token_id) + " out of range");
  return tokens_[static_cast<size_t>(token_id)];
}

nlohmann::json Vocabulary::to_json() const { return nlohmann::json(tokens_); }

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  Vocabulary v;
  if (!j.is_array() || j.size() < 4)
    throw ParseError("vocabulary must be an array starting with the special tokens");
  for (size_t i = 0; i < j.size(); ++i) {
    std::string tok = j[i].get<std::string>();
    int got = v.add(tok);
    if (got != static_cast<int>(i))
      throw ParseError("vocabulary has duplicate or misplaced token '" + tok + "'");
  }
  return v;
}

}  // namespace mrc
