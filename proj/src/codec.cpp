#include "metapolicy/codec.hpp"

#include "metapolicy/canonical.hpp"
#include "metapolicy/errors.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include <fmt/format.h>

namespace metapolicy::codec {

std::uint32_t parts_needed(std::size_t size_bytes)
{
    if (size_bytes == 0)
        throw CodecError(CodecError::Kind::empty_input, 0, "cannot size an empty metapolicy");
    return static_cast<std::uint32_t>((size_bytes + max_part_payload - 1) / max_part_payload);
}

DomainName owner_name_for_part(std::uint32_t index, const DomainName& domain)
{
    if (index < 1)
        throw CodecError(CodecError::Kind::malformed, index, "part indices start at 1");
    auto owner = domain.prepend(metapolicy_label);
    if (index == 1)
        return owner;
    return owner.prepend(std::to_string(index));
}

std::optional<PartOwner> classify_owner(const DomainName& owner)
{
    const auto& labels = owner.labels();
    if (labels.size() >= 2 && labels[0] == metapolicy_label)
        return PartOwner{owner.parent(), 1};
    if (labels.size() >= 3 && labels[1] == metapolicy_label) {
        std::uint32_t index = 0;
        const auto& l = labels[0];
        auto [end, ec] = std::from_chars(l.data(), l.data() + l.size(), index);
        if (ec != std::errc{} || end != l.data() + l.size() || index < 2 || l.front() == '0')
            return std::nullopt;
        return PartOwner{owner.parent().parent(), index};
    }
    return std::nullopt;
}

std::vector<std::string> split_character_strings(std::string_view payload)
{
    std::vector<std::string> out;
    for (std::size_t pos = 0; pos < payload.size(); pos += max_character_string)
        out.emplace_back(payload.substr(pos, max_character_string));
    if (out.empty())
        out.emplace_back();
    return out;
}

std::vector<std::string> TxtPart::character_strings() const
{
    return split_character_strings(payload);
}

TxtRecordSet encapsulate_bytes(const DomainName& domain, std::string_view canonical, std::uint32_t declared_parts)
{
    auto count = parts_needed(canonical.size());
    if (count != declared_parts)
        throw CodecError(CodecError::Kind::parts_mismatch, 0,
                         fmt::format("Header.parts is {} but the metapolicy needs {} parts", declared_parts, count));
    TxtRecordSet set{domain, {}};
    set.parts.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        set.parts.push_back(TxtPart{i + 1, owner_name_for_part(i + 1, domain),
                                    std::string(canonical.substr(std::size_t{i} * max_part_payload, max_part_payload))});
    }
    return set;
}

TxtRecordSet encapsulate(const Metapolicy& m)
{
    return encapsulate_bytes(m.header.domain, canonical_serialize(m), m.header.parts);
}

std::string reassemble(const TxtRecordSet& set)
{
    std::map<std::uint32_t, const TxtPart*> by_index;
    for (const auto& part : set.parts) {
        if (part.payload.size() > max_part_payload)
            throw CodecError(CodecError::Kind::oversize_part, part.index,
                             fmt::format("part {} carries {} bytes (limit {})", part.index, part.payload.size(),
                                         max_part_payload));
        if (!by_index.emplace(part.index, &part).second)
            throw CodecError(CodecError::Kind::malformed, part.index, fmt::format("part {} supplied twice", part.index));
    }
    auto first = by_index.find(1);
    if (first == by_index.end())
        throw CodecError(CodecError::Kind::missing_part, 1, "part 1 is missing");

    std::uint32_t declared = 0;
    try {
        declared = parse_header_prefix(first->second->payload).parts;
    } catch (const ParseError& e) {
        throw CodecError(CodecError::Kind::malformed, 1, std::string("cannot read Parts from part 1: ") + e.what());
    }

    std::string out;
    out.reserve(std::size_t{declared} * max_part_payload);
    for (std::uint32_t i = 1; i <= declared; ++i) {
        auto it = by_index.find(i);
        if (it == by_index.end())
            throw CodecError(CodecError::Kind::missing_part, i, fmt::format("part {} of {} is missing", i, declared));
        out += it->second->payload;
    }
    if (by_index.size() != declared)
        throw CodecError(CodecError::Kind::count_mismatch, 0,
                         fmt::format("Header.parts is {} but {} parts were supplied", declared, by_index.size()));
    return out;
}

std::string quote_character_string(std::string_view s)
{
    std::string out = "\"";
    for (char c : s) {
        auto u = static_cast<unsigned char>(c);
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (u < 0x20 || u >= 0x7f) {
            out += fmt::format("\\{:03}", u);
        } else {
            out += c;
        }
    }
    out += '"';
    return out;
}

std::string to_master_file(const TxtRecordSet& records, std::uint32_t ttl)
{
    std::vector<const TxtPart*> ordered;
    for (const auto& p : records.parts)
        ordered.push_back(&p);
    std::sort(ordered.begin(), ordered.end(), [](const TxtPart* a, const TxtPart* b) { return a->index < b->index; });

    std::string out;
    for (const auto* part : ordered) {
        out += fmt::format("{} {} IN TXT", part->owner.fqdn(), ttl);
        for (const auto& s : part->character_strings()) {
            out += ' ';
            out += quote_character_string(s);
        }
        out += '\n';
    }
    return out;
}

} // namespace metapolicy::codec
