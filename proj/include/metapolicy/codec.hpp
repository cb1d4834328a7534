#pragma once

#include "metapolicy/model.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Carrying a serialized metapolicy in DNS TXT records.
//
// The canonical text is cut every 512 bytes. Part 1 is published at
// `_metapolicy.<domain>`, part n at `<n>._metapolicy.<domain>`. Inside one TXT
// record the payload is further split into character-strings of at most 255
// bytes, as the wire format requires.
namespace metapolicy::codec {

inline constexpr std::size_t max_part_payload = 512;
inline constexpr std::size_t max_character_string = 255;
inline constexpr std::uint32_t default_ttl = 3600;
inline constexpr std::string_view metapolicy_label = "_metapolicy";

std::uint32_t parts_needed(std::size_t size_bytes);

DomainName owner_name_for_part(std::uint32_t index, const DomainName& domain);

// Inverse of owner_name_for_part: the (domain, index) a metapolicy owner name
// refers to, or nothing if `owner` is not one.
struct PartOwner
{
    DomainName domain;
    std::uint32_t index = 0;
};
std::optional<PartOwner> classify_owner(const DomainName& owner);

struct TxtPart
{
    std::uint32_t index = 0;
    DomainName owner;
    std::string payload;

    std::vector<std::string> character_strings() const;

    friend bool operator==(const TxtPart&, const TxtPart&) = default;
};

struct TxtRecordSet
{
    DomainName domain;
    std::vector<TxtPart> parts;

    friend bool operator==(const TxtRecordSet&, const TxtRecordSet&) = default;
};

std::vector<std::string> split_character_strings(std::string_view payload);

// Splits `canonical` positionally. Throws CodecError(parts_mismatch) when the
// split count differs from `declared_parts`.
TxtRecordSet encapsulate_bytes(const DomainName& domain, std::string_view canonical, std::uint32_t declared_parts);
TxtRecordSet encapsulate(const Metapolicy& m);

// Index driven: parts may be supplied in any order.
std::string reassemble(const TxtRecordSet& parts);

// RFC 1035 quoting of one character-string: `"` and `\` are backslash
// escaped, bytes outside printable ASCII become \DDD.
std::string quote_character_string(std::string_view s);

// One master-file line per part, in part order:
//   _metapolicy.a.com. 3600 IN TXT "..." "..."
std::string to_master_file(const TxtRecordSet& records, std::uint32_t ttl = default_ttl);

} // namespace metapolicy::codec
