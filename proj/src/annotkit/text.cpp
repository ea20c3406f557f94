#include "annotkit/text.hpp"

#include <cctype>

namespace annotkit::text {
namespace {

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

bool is_delimiter(unsigned char c) {
  return c < 0x80 && (std::isspace(c) != 0 || std::ispunct(c) != 0);
}

}  // namespace

std::size_t length(std::string_view utf8) {
  std::size_t count = 0;
  for (const char ch : utf8) {
    if (!is_continuation(static_cast<unsigned char>(ch))) ++count;
  }
  return count;
}

std::size_t byte_index(std::string_view utf8, std::size_t offset) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < utf8.size(); ++i) {
    if (is_continuation(static_cast<unsigned char>(utf8[i]))) continue;
    if (seen == offset) return i;
    ++seen;
  }
  return utf8.size();
}

std::string slice(std::string_view utf8, std::size_t start, std::size_t end) {
  const auto from = byte_index(utf8, start);
  const auto to = byte_index(utf8, end);
  if (to <= from) return {};
  return std::string(utf8.substr(from, to - from));
}

std::string fold_ascii(std::string_view value) {
  std::string out(value);
  for (auto& ch : out) {
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  return out;
}

std::vector<Token> tokenize(std::string_view utf8, bool fold_case) {
  std::vector<Token> tokens;
  std::size_t offset = 0;
  std::size_t i = 0;
  while (i < utf8.size()) {
    const auto lead = static_cast<unsigned char>(utf8[i]);
    if (is_delimiter(lead)) {
      ++i;
      ++offset;
      continue;
    }
    const std::size_t begin_byte = i;
    const std::size_t begin_offset = offset;
    while (i < utf8.size() && !is_delimiter(static_cast<unsigned char>(utf8[i]))) {
      ++i;
      while (i < utf8.size() && is_continuation(static_cast<unsigned char>(utf8[i]))) ++i;
      ++offset;
    }
    std::string value(utf8.substr(begin_byte, i - begin_byte));
    if (fold_case) value = fold_ascii(value);
    tokens.push_back(Token{std::move(value), begin_offset, offset});
  }
  return tokens;
}

}  // namespace annotkit::text
