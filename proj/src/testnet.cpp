#include "metapolicy/testnet.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>

namespace metapolicy::testnet {

using dns::RecordType;

void ZoneFixture::add(const DomainName& owner, RecordType type, Bytes rdata)
{
    records_[{owner, type}].push_back(std::move(rdata));
    owners_.insert(owner);
}

void ZoneFixture::add_txt(const DomainName& owner, const dns::TxtStrings& strings)
{
    add(owner, RecordType::TXT, dns::encode_txt(strings));
}

void ZoneFixture::add_txt(const DomainName& owner, std::string_view text)
{
    add_txt(owner, codec::split_character_strings(text));
}

void ZoneFixture::add(const dns::ZoneRecord& record)
{
    add(record.owner, record.type, record.rdata);
}

void ZoneFixture::add(const std::vector<dns::ZoneRecord>& records)
{
    for (const auto& r : records)
        add(r);
}

void ZoneFixture::add(const codec::TxtRecordSet& records)
{
    for (const auto& part : records.parts)
        add_txt(part.owner, part.character_strings());
}

void ZoneFixture::publish(const codec::TxtRecordSet& records)
{
    std::vector<DomainName> stale;
    for (const auto& owner : owners_) {
        auto po = codec::classify_owner(owner);
        if (po && po->domain == records.domain)
            stale.push_back(owner);
    }
    for (const auto& owner : stale)
        remove_owner(owner);
    add(records);
}

void ZoneFixture::remove(const DomainName& owner, RecordType type)
{
    records_.erase({owner, type});
    for (const auto& [key, _] : records_)
        if (key.first == owner)
            return;
    owners_.erase(owner);
}

void ZoneFixture::remove_owner(const DomainName& owner)
{
    std::erase_if(records_, [&](const auto& kv) { return kv.first.first == owner; });
    owners_.erase(owner);
}

ZoneFixture ZoneFixture::from_master_file(std::string_view text, std::optional<DomainName> origin)
{
    ZoneFixture zone;
    zone.add(dns::parse_master_file(text, std::move(origin)));
    return zone;
}

const std::vector<Bytes>& ZoneFixture::lookup(const DomainName& owner, RecordType type) const
{
    static const std::vector<Bytes> none;
    auto it = records_.find({owner, type});
    return it == records_.end() ? none : it->second;
}

bool ZoneFixture::has_owner(const DomainName& owner) const
{
    return owners_.contains(owner);
}

TestnetResolver::TestnetResolver(std::shared_ptr<const ZoneFixture> zone, std::optional<AdversaryTransform> transform)
    : zone_(std::move(zone))
    , transform_(std::move(transform))
{}

namespace {

QueryResult plain_answer(const ZoneFixture& zone, const DomainName& owner, RecordType type)
{
    if (!zone.has_owner(owner))
        return {QueryStatus::nxdomain, {}};
    return {QueryStatus::ok, zone.lookup(owner, type)};
}

std::uint32_t published_part_count(const ZoneFixture& zone, const DomainName& domain)
{
    std::uint32_t n = 0;
    while (zone.has_owner(codec::owner_name_for_part(n + 1, domain)))
        ++n;
    return n;
}

Bytes tamper(const Bytes& rdata, std::size_t offset)
{
    auto text = dns::join(dns::decode_txt(rdata));
    if (text.empty())
        return rdata;
    auto& c = text[offset % text.size()];
    // Stay printable so the damage reaches the signature check.
    c = c == 'x' ? 'y' : 'x';
    return dns::encode_txt(codec::split_character_strings(text));
}

} // namespace

QueryResult TestnetResolver::answer(const ZoneFixture& zone, const DomainName& owner, RecordType type) const
{
    auto part = codec::classify_owner(owner);
    if (!transform_ || !part || type != RecordType::TXT)
        return plain_answer(zone, owner, type);

    return std::visit(
        [&](const auto& t) -> QueryResult {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, StripAll>) {
                return {QueryStatus::nxdomain, {}};
            } else if constexpr (std::is_same_v<T, StripParts>) {
                if (t.indices.contains(part->index))
                    return {QueryStatus::nxdomain, {}};
                return plain_answer(zone, owner, type);
            } else if constexpr (std::is_same_v<T, TamperByte>) {
                auto result = plain_answer(zone, owner, type);
                if (part->index == t.part)
                    for (auto& rdata : result.rdatas)
                        rdata = tamper(rdata, t.offset);
                return result;
            } else if constexpr (std::is_same_v<T, RollbackTo>) {
                return plain_answer(t.snapshot ? *t.snapshot : zone, owner, type);
            } else {
                auto n = published_part_count(zone, part->domain);
                if (part->index < 2 || part->index > n)
                    return plain_answer(zone, owner, type);
                auto swapped = n + 2 - part->index;
                return plain_answer(zone, codec::owner_name_for_part(swapped, part->domain), type);
            }
        },
        *transform_);
}

QueryResult TestnetResolver::query(const DomainName& owner, RecordType type)
{
    std::lock_guard lock(mutex_);
    log_.push_back({owner, type, std::chrono::steady_clock::now()});
    return answer(*zone_, owner, type);
}

void TestnetResolver::set_transform(std::optional<AdversaryTransform> transform)
{
    std::lock_guard lock(mutex_);
    transform_ = std::move(transform);
}

void TestnetResolver::set_zone(std::shared_ptr<const ZoneFixture> zone)
{
    std::lock_guard lock(mutex_);
    zone_ = std::move(zone);
}

std::vector<LoggedQuery> TestnetResolver::log() const
{
    std::lock_guard lock(mutex_);
    return log_;
}

std::vector<std::pair<DomainName, RecordType>> TestnetResolver::query_log() const
{
    std::lock_guard lock(mutex_);
    std::vector<std::pair<DomainName, RecordType>> out;
    out.reserve(log_.size());
    for (const auto& q : log_)
        out.emplace_back(q.owner, q.type);
    return out;
}

void TestnetResolver::clear_log()
{
    std::lock_guard lock(mutex_);
    log_.clear();
}

std::shared_ptr<TestnetResolver> serve(ZoneFixture zone, std::optional<AdversaryTransform> transform)
{
    return std::make_shared<TestnetResolver>(std::make_shared<const ZoneFixture>(std::move(zone)),
                                             std::move(transform));
}

std::vector<std::pair<DomainName, RecordType>> query_log(const ResolverPort& port)
{
    auto* testnet = dynamic_cast<const TestnetResolver*>(&port);
    if (!testnet)
        throw PreconditionError("query_log needs a resolver produced by serve()");
    return testnet->query_log();
}

// UdpDnsServer

namespace {

int bind_loopback(int type, std::uint16_t port)
{
    int fd = ::socket(AF_INET, type, 0);
    if (fd < 0)
        throw Error("cannot open testnet socket");
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(fd);
        throw Error("cannot bind testnet socket on port " + std::to_string(port));
    }
    return fd;
}

std::uint16_t bound_port(int fd)
{
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    return ntohs(addr.sin_port);
}

bool read_all(int fd, std::uint8_t* buf, std::size_t n)
{
    std::size_t got = 0;
    while (got < n) {
        pollfd pfd{fd, POLLIN, 0};
        if (::poll(&pfd, 1, 2000) <= 0)
            return false;
        auto rc = ::recv(fd, buf + got, n - got, 0);
        if (rc <= 0)
            return false;
        got += static_cast<std::size_t>(rc);
    }
    return true;
}

} // namespace

UdpDnsServer::UdpDnsServer(std::shared_ptr<ResolverPort> backend, std::uint16_t port)
    : backend_(std::move(backend))
{
    udp_fd_ = bind_loopback(SOCK_DGRAM, port);
    port_ = bound_port(udp_fd_);
    try {
        tcp_fd_ = bind_loopback(SOCK_STREAM, port_);
    } catch (...) {
        ::close(udp_fd_);
        throw;
    }
    ::listen(tcp_fd_, 16);
    thread_ = std::thread([this] { run(); });
}

UdpDnsServer::~UdpDnsServer()
{
    stop_ = true;
    if (thread_.joinable())
        thread_.join();
    ::close(udp_fd_);
    ::close(tcp_fd_);
}

Bytes UdpDnsServer::respond(std::span<const std::uint8_t> request, bool udp)
{
    dns::Message query;
    try {
        query = dns::decode_message(request);
    } catch (const dns::WireError&) {
        if (request.size() < 2)
            return {};
        dns::Message err;
        err.id = static_cast<std::uint16_t>((request[0] << 8) | request[1]);
        err.response = true;
        err.rcode = dns::Rcode::formerr;
        return dns::encode_message(err);
    }

    dns::Message reply;
    reply.id = query.id;
    reply.response = true;
    reply.authoritative = true;
    reply.recursion_desired = query.recursion_desired;
    reply.questions = query.questions;
    if (query.questions.size() != 1) {
        reply.rcode = dns::Rcode::formerr;
        return dns::encode_message(reply);
    }
    const auto& q = query.questions.front();
    auto result = backend_->query(q.name, q.type);
    switch (result.status) {
    case QueryStatus::ok: break;
    case QueryStatus::nxdomain: reply.rcode = dns::Rcode::nxdomain; break;
    case QueryStatus::servfail:
    case QueryStatus::timeout: reply.rcode = dns::Rcode::servfail; break;
    }
    for (auto& rdata : result.rdatas)
        reply.answers.push_back({q.name, q.type, 300, std::move(rdata)});

    auto wire = dns::encode_message(reply);
    if (udp && wire.size() > 512) {
        reply.answers.clear();
        reply.truncated = true;
        wire = dns::encode_message(reply);
    }
    return wire;
}

void UdpDnsServer::run()
{
    std::uint8_t buf[65535];
    while (!stop_) {
        pollfd fds[2] = {{udp_fd_, POLLIN, 0}, {tcp_fd_, POLLIN, 0}};
        int rc = ::poll(fds, 2, 50);
        if (rc <= 0)
            continue;

        if (fds[0].revents & POLLIN) {
            sockaddr_storage peer{};
            socklen_t peer_len = sizeof peer;
            auto n = ::recvfrom(udp_fd_, buf, sizeof buf, 0, reinterpret_cast<sockaddr*>(&peer), &peer_len);
            if (n > 0) {
                auto wire = respond(std::span(buf, static_cast<std::size_t>(n)), true);
                if (!wire.empty())
                    ::sendto(udp_fd_, wire.data(), wire.size(), 0, reinterpret_cast<sockaddr*>(&peer), peer_len);
            }
        }

        if (fds[1].revents & POLLIN) {
            int conn = ::accept(tcp_fd_, nullptr, nullptr);
            if (conn < 0)
                continue;
            std::uint8_t len_buf[2];
            if (read_all(conn, len_buf, 2)) {
                std::size_t len = (std::size_t{len_buf[0]} << 8) | len_buf[1];
                if (read_all(conn, buf, len)) {
                    auto wire = respond(std::span(buf, len), false);
                    Bytes framed{static_cast<std::uint8_t>(wire.size() >> 8),
                                 static_cast<std::uint8_t>(wire.size() & 0xff)};
                    framed.insert(framed.end(), wire.begin(), wire.end());
                    ::send(conn, framed.data(), framed.size(), MSG_NOSIGNAL);
                }
            }
            ::close(conn);
        }
    }
}

} // namespace metapolicy::testnet
