#pragma once

#include "metapolicy/dns_wire.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// RFC 1035 master-file reading and writing, limited to the record types in
// dns_wire.hpp. Supports $ORIGIN, $TTL, `@`, relative owner names, blank
// owners (repeat the previous owner), comments and parenthesised
// continuation lines.
namespace metapolicy::dns {

struct ZoneRecord
{
    DomainName owner;
    std::uint32_t ttl = 3600;
    RecordType type = RecordType::TXT;
    Bytes rdata;

    friend bool operator==(const ZoneRecord&, const ZoneRecord&) = default;
};

class ZoneParseError : public Error
{
public:
    ZoneParseError(std::size_t line, const std::string& reason)
        : Error("zone line " + std::to_string(line) + ": " + reason)
        , line_(line)
    {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

std::vector<ZoneRecord> parse_master_file(std::string_view text, std::optional<DomainName> origin = std::nullopt,
                                          std::uint32_t default_ttl = 3600);

Bytes parse_rdata(RecordType type, const std::vector<std::string>& tokens);
std::string format_rdata(RecordType type, std::span<const std::uint8_t> rdata);
std::string format_record(const ZoneRecord& record);

} // namespace metapolicy::dns
