#pragma once

#include "metapolicy/codec.hpp"
#include "metapolicy/resolver.hpp"
#include "metapolicy/zone_file.hpp"

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

// In-process authoritative DNS fixture with a query log and adversarial
// response rewriting.
namespace metapolicy::testnet {

class ZoneFixture
{
public:
    using Key = std::pair<DomainName, dns::RecordType>;

    void add(const DomainName& owner, dns::RecordType type, Bytes rdata);
    void add_txt(const DomainName& owner, const dns::TxtStrings& strings);
    void add_txt(const DomainName& owner, std::string_view text);
    void add(const dns::ZoneRecord& record);
    void add(const std::vector<dns::ZoneRecord>& records);
    void add(const codec::TxtRecordSet& records);
    // Replaces every metapolicy part of `records.domain` with `records`.
    void publish(const codec::TxtRecordSet& records);
    void remove(const DomainName& owner, dns::RecordType type);
    void remove_owner(const DomainName& owner);

    static ZoneFixture from_master_file(std::string_view text, std::optional<DomainName> origin = std::nullopt);

    // Empty when absent; see has_owner for NXDOMAIN vs NODATA.
    const std::vector<Bytes>& lookup(const DomainName& owner, dns::RecordType type) const;
    bool has_owner(const DomainName& owner) const;
    const std::map<Key, std::vector<Bytes>>& records() const noexcept { return records_; }

private:
    std::map<Key, std::vector<Bytes>> records_;
    std::set<DomainName> owners_;
};

struct StripAll {};
struct StripParts { std::set<std::uint32_t> indices; };
struct TamperByte { std::uint32_t part = 1; std::size_t offset = 0; };
// Answers metapolicy queries from an older copy of the zone.
struct RollbackTo { std::shared_ptr<const ZoneFixture> snapshot; };
// Parts 2..n answer with each other's payloads, in reverse.
struct ReorderParts {};

using AdversaryTransform = std::variant<StripAll, StripParts, TamperByte, RollbackTo, ReorderParts>;

struct LoggedQuery
{
    DomainName owner;
    dns::RecordType type;
    std::chrono::steady_clock::time_point at;
};

class TestnetResolver final : public ResolverPort
{
public:
    explicit TestnetResolver(std::shared_ptr<const ZoneFixture> zone, std::optional<AdversaryTransform> transform = {});

    QueryResult query(const DomainName& owner, dns::RecordType type) override;

    void set_transform(std::optional<AdversaryTransform> transform);
    void set_zone(std::shared_ptr<const ZoneFixture> zone);

    std::vector<LoggedQuery> log() const;
    // Owner and type only, in arrival order.
    std::vector<std::pair<DomainName, dns::RecordType>> query_log() const;
    void clear_log();

private:
    QueryResult answer(const ZoneFixture& zone, const DomainName& owner, dns::RecordType type) const;

    mutable std::mutex mutex_;
    std::shared_ptr<const ZoneFixture> zone_;
    std::optional<AdversaryTransform> transform_;
    std::vector<LoggedQuery> log_;
};

std::shared_ptr<TestnetResolver> serve(ZoneFixture zone, std::optional<AdversaryTransform> transform = {});
std::vector<std::pair<DomainName, dns::RecordType>> query_log(const ResolverPort& port);

// Serves a ResolverPort over real UDP and TCP sockets on 127.0.0.1, for
// exercising DnsWireResolver. UDP answers above 512 bytes are truncated.
class UdpDnsServer
{
public:
    explicit UdpDnsServer(std::shared_ptr<ResolverPort> backend, std::uint16_t port = 0);
    ~UdpDnsServer();
    UdpDnsServer(const UdpDnsServer&) = delete;
    UdpDnsServer& operator=(const UdpDnsServer&) = delete;

    std::uint16_t port() const noexcept { return port_; }
    ResolverAddress address() const { return {"127.0.0.1", port_}; }

private:
    Bytes respond(std::span<const std::uint8_t> request, bool udp);
    void run();

    std::shared_ptr<ResolverPort> backend_;
    int udp_fd_ = -1;
    int tcp_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stop_{false};
    std::thread thread_;
};

} // namespace metapolicy::testnet
