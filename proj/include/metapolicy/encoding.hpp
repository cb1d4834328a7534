#pragma once

#include "metapolicy/model.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace metapolicy {

// Standard base64 with padding (RFC 4648), no line breaks.
std::string base64_encode(std::span<const std::uint8_t> data);
// Strict: rejects whitespace, bad characters and bad padding.
std::optional<Bytes> base64_decode(std::string_view text);

inline Bytes to_bytes(std::string_view text)
{
    return Bytes(text.begin(), text.end());
}

inline std::span<const std::uint8_t> as_bytes(std::string_view text) noexcept
{
    return {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()};
}

} // namespace metapolicy
