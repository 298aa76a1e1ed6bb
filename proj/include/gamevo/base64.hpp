#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gamevo {

// Little-endian IEEE-754 doubles packed and encoded as standard base64.
std::string encode_doubles(std::span<const double> values);
std::vector<double> decode_doubles(std::string_view text);

} // namespace gamevo
