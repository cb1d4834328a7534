#include "metapolicy/zone_file.hpp"

#include "metapolicy/codec.hpp"
#include "metapolicy/encoding.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include <fmt/format.h>

namespace metapolicy::dns {

namespace {

struct Token
{
    std::string text;
    bool quoted = false;
};

struct LogicalLine
{
    std::size_t number = 0;
    bool blank_owner = false;
    std::vector<Token> tokens;
};

std::vector<LogicalLine> tokenize(std::string_view text)
{
    std::vector<LogicalLine> lines;
    LogicalLine current;
    Token token;
    bool in_token = false;
    bool in_quote = false;
    int depth = 0;
    std::size_t line_no = 1;
    bool at_line_start = true;

    auto flush_token = [&] {
        if (in_token)
            current.tokens.push_back(std::move(token));
        token = Token{};
        in_token = false;
    };
    auto flush_line = [&] {
        flush_token();
        if (!current.tokens.empty())
            lines.push_back(std::move(current));
        current = LogicalLine{};
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (at_line_start && depth == 0) {
            current.number = line_no;
            current.blank_owner = (c == ' ' || c == '\t');
            at_line_start = false;
        }
        if (c == '\\') {
            if (i + 1 >= text.size())
                throw ZoneParseError(line_no, "dangling backslash");
            in_token = true;
            if (std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
                if (i + 3 >= text.size())
                    throw ZoneParseError(line_no, "truncated \\DDD escape");
                unsigned value = 0;
                auto digits = text.substr(i + 1, 3);
                auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
                if (ec != std::errc{} || end != digits.data() + 3 || value > 255)
                    throw ZoneParseError(line_no, "bad \\DDD escape");
                token.text.push_back(static_cast<char>(value));
                i += 3;
            } else {
                token.text.push_back(text[++i]);
            }
            continue;
        }
        if (in_quote) {
            if (c == '"') {
                in_quote = false;
            } else if (c == '\n') {
                throw ZoneParseError(line_no, "unterminated quoted string");
            } else {
                token.text.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            flush_token();
            in_token = true;
            token.quoted = true;
            in_quote = true;
            break;
        case ';':
            while (i + 1 < text.size() && text[i + 1] != '\n')
                ++i;
            break;
        case '(':
            flush_token();
            ++depth;
            break;
        case ')':
            flush_token();
            if (--depth < 0)
                throw ZoneParseError(line_no, "unbalanced ')'");
            break;
        case '\n':
            ++line_no;
            if (depth == 0) {
                flush_line();
                at_line_start = true;
            } else {
                flush_token();
            }
            break;
        case ' ':
        case '\t':
        case '\r': flush_token(); break;
        default:
            in_token = true;
            token.text.push_back(c);
        }
    }
    if (in_quote)
        throw ZoneParseError(line_no, "unterminated quoted string");
    if (depth != 0)
        throw ZoneParseError(line_no, "unbalanced '('");
    flush_line();
    return lines;
}

std::string upper(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

bool all_digits(std::string_view s)
{
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

template <typename T>
T number(const std::string& token, const char* what)
{
    T value{};
    auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || end != token.data() + token.size())
        throw WireError(std::string("bad ") + what + " '" + token + "'");
    return value;
}

std::string concat(const std::vector<std::string>& tokens, std::size_t from)
{
    std::string out;
    for (std::size_t i = from; i < tokens.size(); ++i)
        out += tokens[i];
    return out;
}

Bytes parse_hex(const std::string& hex)
{
    if (hex.size() % 2 != 0)
        throw WireError("odd-length hex data");
    Bytes out;
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        std::uint8_t b = 0;
        auto [end, ec] = std::from_chars(hex.data() + i, hex.data() + i + 2, b, 16);
        if (ec != std::errc{} || end != hex.data() + i + 2)
            throw WireError("bad hex data");
        out.push_back(b);
    }
    return out;
}

void need_tokens(const std::vector<std::string>& tokens, std::size_t n, RecordType type)
{
    if (tokens.size() < n)
        throw WireError(to_string(type) + " record needs at least " + std::to_string(n) + " RDATA fields");
}

DomainName resolve_owner(const std::string& token, const std::optional<DomainName>& origin)
{
    if (token == "@") {
        if (!origin)
            throw WireError("'@' used without $ORIGIN");
        return *origin;
    }
    if (token.ends_with('.'))
        return DomainName::parse(token);
    if (!origin)
        throw WireError("relative name '" + token + "' without $ORIGIN");
    return DomainName::parse(token + "." + origin->str());
}

} // namespace

Bytes parse_rdata(RecordType type, const std::vector<std::string>& tokens)
{
    switch (type) {
    case RecordType::A:
        need_tokens(tokens, 1, type);
        return encode_a(tokens[0]);
    case RecordType::TXT:
        need_tokens(tokens, 1, type);
        return encode_txt(tokens);
    case RecordType::DNSKEY: {
        need_tokens(tokens, 4, type);
        DnskeyRdata key;
        key.flags = number<std::uint16_t>(tokens[0], "DNSKEY flags");
        key.protocol = number<std::uint8_t>(tokens[1], "DNSKEY protocol");
        key.algorithm = number<std::uint8_t>(tokens[2], "DNSKEY algorithm");
        auto decoded = base64_decode(concat(tokens, 3));
        if (!decoded)
            throw WireError("bad DNSKEY base64");
        key.public_key = std::move(*decoded);
        return encode_dnskey(key);
    }
    case RecordType::CAA: {
        need_tokens(tokens, 3, type);
        return encode_caa(CaaRdata{number<std::uint8_t>(tokens[0], "CAA flags"), tokens[1], tokens[2]});
    }
    case RecordType::TLSA: {
        need_tokens(tokens, 4, type);
        TlsaRdata tlsa;
        tlsa.usage = number<std::uint8_t>(tokens[0], "TLSA usage");
        tlsa.selector = number<std::uint8_t>(tokens[1], "TLSA selector");
        tlsa.matching_type = number<std::uint8_t>(tokens[2], "TLSA matching type");
        tlsa.data = parse_hex(concat(tokens, 3));
        return encode_tlsa(tlsa);
    }
    }
    throw WireError("unsupported record type");
}

std::string format_rdata(RecordType type, std::span<const std::uint8_t> rdata)
{
    switch (type) {
    case RecordType::A: return decode_a(rdata);
    case RecordType::TXT: {
        std::string out;
        for (const auto& s : decode_txt(rdata)) {
            if (!out.empty())
                out += ' ';
            out += codec::quote_character_string(s);
        }
        return out;
    }
    case RecordType::DNSKEY: {
        auto key = decode_dnskey(rdata);
        return fmt::format("{} {} {} {}", key.flags, key.protocol, key.algorithm, base64_encode(key.public_key));
    }
    case RecordType::CAA: {
        auto caa = decode_caa(rdata);
        return fmt::format("{} {} {}", caa.flags, caa.tag, codec::quote_character_string(caa.value));
    }
    case RecordType::TLSA: {
        auto tlsa = decode_tlsa(rdata);
        std::string hex;
        for (auto b : tlsa.data)
            hex += fmt::format("{:02X}", b);
        return fmt::format("{} {} {} {}", tlsa.usage, tlsa.selector, tlsa.matching_type, hex);
    }
    }
    throw WireError("unsupported record type");
}

std::string format_record(const ZoneRecord& record)
{
    return fmt::format("{} {} IN {} {}", record.owner.fqdn(), record.ttl, to_string(record.type),
                       format_rdata(record.type, record.rdata));
}

std::vector<ZoneRecord> parse_master_file(std::string_view text, std::optional<DomainName> origin,
                                          std::uint32_t default_ttl)
{
    std::vector<ZoneRecord> out;
    std::optional<DomainName> previous_owner;
    for (auto& line : tokenize(text)) {
        try {
            auto& tokens = line.tokens;
            if (!tokens.front().quoted && tokens.front().text.starts_with('$')) {
                auto directive = upper(tokens.front().text);
                if (tokens.size() < 2)
                    throw WireError(directive + " needs an argument");
                if (directive == "$ORIGIN")
                    origin = DomainName::parse(tokens[1].text);
                else if (directive == "$TTL")
                    default_ttl = number<std::uint32_t>(tokens[1].text, "$TTL");
                else
                    throw WireError("unsupported directive " + directive);
                continue;
            }

            std::size_t pos = 0;
            ZoneRecord rec;
            if (line.blank_owner) {
                if (!previous_owner)
                    throw WireError("record without an owner name");
                rec.owner = *previous_owner;
            } else {
                rec.owner = resolve_owner(tokens[pos++].text, origin);
            }
            rec.ttl = default_ttl;

            std::optional<RecordType> type;
            while (pos < tokens.size() && !type) {
                const auto& t = tokens[pos++];
                if (t.quoted)
                    throw WireError("unexpected quoted string before the record type");
                if (all_digits(t.text)) {
                    rec.ttl = number<std::uint32_t>(t.text, "TTL");
                } else if (upper(t.text) == "IN") {
                    continue;
                } else {
                    type = parse_record_type(upper(t.text));
                    if (!type)
                        throw WireError("unsupported record type '" + t.text + "'");
                }
            }
            if (!type)
                throw WireError("missing record type");
            rec.type = *type;

            std::vector<std::string> rdata;
            for (; pos < tokens.size(); ++pos)
                rdata.push_back(std::move(tokens[pos].text));
            rec.rdata = parse_rdata(rec.type, rdata);
            previous_owner = rec.owner;
            out.push_back(std::move(rec));
        } catch (const ZoneParseError&) {
            throw;
        } catch (const Error& e) {
            throw ZoneParseError(line.number, e.what());
        }
    }
    return out;
}

} // namespace metapolicy::dns
