#pragma once

#include <cstddef>
#include <string>
#include <string_view>

// Character counts throughout the library are Unicode scalar values,
// not bytes. These helpers convert at the boundaries.
namespace jurirag::utf8 {

/// Throws Error(Parse) on malformed input.
std::u32string decode(std::string_view bytes);
std::string encode(std::u32string_view scalars);
std::size_t length(std::string_view bytes);

}  // namespace jurirag::utf8
