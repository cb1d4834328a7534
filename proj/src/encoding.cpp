#include "metapolicy/encoding.hpp"

#include <openssl/evp.h>

namespace metapolicy {

std::string base64_encode(std::span<const std::uint8_t> data)
{
    if (data.empty())
        return {};
    std::string out(4 * ((data.size() + 2) / 3), '\0');
    int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                                  static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(written));
    return out;
}

std::optional<Bytes> base64_decode(std::string_view text)
{
    if (text.empty())
        return Bytes{};
    if (text.size() % 4 != 0)
        return std::nullopt;
    // EVP_DecodeBlock skips surrounding whitespace; canonical text must not carry any.
    for (char c : text) {
        bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' ||
                  c == '/' || c == '=';
        if (!ok)
            return std::nullopt;
    }
    std::size_t padding = 0;
    if (text.back() == '=')
        ++padding;
    if (text.size() >= 2 && text[text.size() - 2] == '=')
        ++padding;
    if (text.substr(0, text.size() - padding).find('=') != std::string_view::npos)
        return std::nullopt;

    Bytes out(3 * text.size() / 4);
    int written = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (written < 0 || static_cast<std::size_t>(written) < padding)
        return std::nullopt;
    out.resize(static_cast<std::size_t>(written) - padding);
    // Non-canonical trailing bits would decode but not re-encode identically.
    if (base64_encode(out) != text)
        return std::nullopt;
    return out;
}

} // namespace metapolicy
