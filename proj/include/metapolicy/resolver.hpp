#pragma once

#include "metapolicy/dns_wire.hpp"

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

namespace metapolicy {

enum class QueryStatus { ok, nxdomain, servfail, timeout };

std::string_view to_string(QueryStatus status) noexcept;

struct QueryResult
{
    QueryStatus status = QueryStatus::ok;
    // RDATA of every answer record of the requested type, wire encoded.
    std::vector<Bytes> rdatas;
};

// What policy agents and the scanner use to talk to DNS. Implementations must
// accept concurrent calls.
class ResolverPort
{
public:
    virtual ~ResolverPort() = default;

    virtual QueryResult query(const DomainName& owner, dns::RecordType type) = 0;

    // One entry per TXT record, each a list of character-strings. Empty on
    // NXDOMAIN; ResolutionError on SERVFAIL or timeout.
    std::vector<dns::TxtStrings> query_txt(const DomainName& owner);
    std::vector<DnskeyRdata> query_dnskey(const DomainName& domain);
};

struct ResolverAddress
{
    std::string host = "127.0.0.1";
    std::uint16_t port = 53;

    // "host", "host:port" or "[v6]:port".
    static ResolverAddress parse(std::string_view text);
    std::string str() const;
};

// Talks to a real DNS server: UDP first, TCP when the answer is truncated.
class DnsWireResolver final : public ResolverPort
{
public:
    explicit DnsWireResolver(ResolverAddress server, std::chrono::milliseconds timeout = std::chrono::seconds(2),
                             int attempts = 2);

    QueryResult query(const DomainName& owner, dns::RecordType type) override;

private:
    std::optional<dns::Message> exchange_udp(const Bytes& request);
    std::optional<dns::Message> exchange_tcp(const Bytes& request);

    ResolverAddress server_;
    std::chrono::milliseconds timeout_;
    int attempts_;
};

} // namespace metapolicy
