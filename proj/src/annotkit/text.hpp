#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace annotkit::text {

// Offsets everywhere in annotkit count Unicode code points of UTF-8 text.
std::size_t length(std::string_view utf8);

// Byte index of the code point at `offset`; offset == length() maps to size().
std::size_t byte_index(std::string_view utf8, std::size_t offset);

std::string slice(std::string_view utf8, std::size_t start, std::size_t end);

struct Token {
  std::string value;  // case-folded when the tokenizer was asked to fold
  std::size_t start;  // code point offset, inclusive
  std::size_t end;    // code point offset, exclusive
};

// Tokens are maximal runs of code points that are neither whitespace nor
// ASCII punctuation. Non-ASCII code points count as word characters.
std::vector<Token> tokenize(std::string_view utf8, bool fold_case);

std::string fold_ascii(std::string_view value);

}  // namespace annotkit::text
