#include "metapolicy/resolver.hpp"

#include "metapolicy/errors.hpp"

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <mutex>
#include <random>

namespace metapolicy {

std::string_view to_string(QueryStatus status) noexcept
{
    switch (status) {
    case QueryStatus::ok: return "ok";
    case QueryStatus::nxdomain: return "nxdomain";
    case QueryStatus::servfail: return "servfail";
    case QueryStatus::timeout: return "timeout";
    }
    return "servfail";
}

namespace {

QueryResult checked(ResolverPort& port, const DomainName& owner, dns::RecordType type)
{
    auto result = port.query(owner, type);
    if (result.status == QueryStatus::servfail || result.status == QueryStatus::timeout)
        throw ResolutionError(false, dns::to_string(type) + " query for " + owner.str() + " failed: " +
                                         std::string(to_string(result.status)));
    return result;
}

class Socket
{
public:
    explicit Socket(int fd) : fd_(fd) {}
    ~Socket()
    {
        if (fd_ >= 0)
            ::close(fd_);
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;

    int get() const noexcept { return fd_; }
    explicit operator bool() const noexcept { return fd_ >= 0; }

private:
    int fd_;
};

struct AddrInfo
{
    addrinfo* head = nullptr;
    ~AddrInfo()
    {
        if (head)
            freeaddrinfo(head);
    }
};

bool wait_for(int fd, short events, std::chrono::steady_clock::time_point deadline)
{
    while (true) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0)
            return false;
        pollfd pfd{fd, events, 0};
        int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
        if (rc > 0)
            return true;
        if (rc == 0)
            return false;
        if (errno != EINTR)
            return false;
    }
}

bool read_exact(int fd, std::uint8_t* buf, std::size_t n, std::chrono::steady_clock::time_point deadline)
{
    std::size_t got = 0;
    while (got < n) {
        if (!wait_for(fd, POLLIN, deadline))
            return false;
        auto rc = ::recv(fd, buf + got, n - got, 0);
        if (rc <= 0)
            return false;
        got += static_cast<std::size_t>(rc);
    }
    return true;
}

std::uint16_t next_query_id()
{
    static std::mutex mutex;
    static std::mt19937 rng{std::random_device{}()};
    std::lock_guard lock(mutex);
    return static_cast<std::uint16_t>(rng());
}

} // namespace

std::vector<dns::TxtStrings> ResolverPort::query_txt(const DomainName& owner)
{
    std::vector<dns::TxtStrings> out;
    for (const auto& rdata : checked(*this, owner, dns::RecordType::TXT).rdatas)
        out.push_back(dns::decode_txt(rdata));
    return out;
}

std::vector<DnskeyRdata> ResolverPort::query_dnskey(const DomainName& domain)
{
    std::vector<DnskeyRdata> out;
    for (const auto& rdata : checked(*this, domain, dns::RecordType::DNSKEY).rdatas)
        out.push_back(dns::decode_dnskey(rdata));
    return out;
}

ResolverAddress ResolverAddress::parse(std::string_view text)
{
    ResolverAddress out;
    std::string_view port;
    if (text.starts_with('[')) {
        auto close = text.find(']');
        if (close == std::string_view::npos)
            throw ConfigError("bad resolver address '" + std::string(text) + "'");
        out.host = std::string(text.substr(1, close - 1));
        if (close + 1 < text.size()) {
            if (text[close + 1] != ':')
                throw ConfigError("bad resolver address '" + std::string(text) + "'");
            port = text.substr(close + 2);
        }
    } else if (auto colon = text.find(':'); colon != std::string_view::npos && text.find(':', colon + 1) == std::string_view::npos) {
        out.host = std::string(text.substr(0, colon));
        port = text.substr(colon + 1);
    } else {
        out.host = std::string(text);
    }
    if (out.host.empty())
        throw ConfigError("bad resolver address '" + std::string(text) + "'");
    if (!port.empty()) {
        auto [end, ec] = std::from_chars(port.data(), port.data() + port.size(), out.port);
        if (ec != std::errc{} || end != port.data() + port.size() || out.port == 0)
            throw ConfigError("bad resolver port '" + std::string(port) + "'");
    }
    return out;
}

std::string ResolverAddress::str() const
{
    if (host.find(':') != std::string::npos)
        return "[" + host + "]:" + std::to_string(port);
    return host + ":" + std::to_string(port);
}

DnsWireResolver::DnsWireResolver(ResolverAddress server, std::chrono::milliseconds timeout, int attempts)
    : server_(std::move(server))
    , timeout_(timeout)
    , attempts_(attempts < 1 ? 1 : attempts)
{}

namespace {

AddrInfo resolve_server(const ResolverAddress& server, int socktype)
{
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = socktype;
    hints.ai_flags = AI_NUMERICSERV;
    AddrInfo info;
    auto port = std::to_string(server.port);
    if (getaddrinfo(server.host.c_str(), port.c_str(), &hints, &info.head) != 0 || !info.head)
        throw ResolutionError(false, "cannot resolve DNS server address " + server.str());
    return info;
}

} // namespace

std::optional<dns::Message> DnsWireResolver::exchange_udp(const Bytes& request)
{
    auto info = resolve_server(server_, SOCK_DGRAM);
    Socket sock(::socket(info.head->ai_family, SOCK_DGRAM, 0));
    if (!sock)
        throw ResolutionError(false, "cannot open UDP socket");
    if (::connect(sock.get(), info.head->ai_addr, info.head->ai_addrlen) != 0)
        return std::nullopt;
    if (::send(sock.get(), request.data(), request.size(), 0) < 0)
        return std::nullopt;

    auto deadline = std::chrono::steady_clock::now() + timeout_;
    std::uint8_t buf[65535];
    while (wait_for(sock.get(), POLLIN, deadline)) {
        auto n = ::recv(sock.get(), buf, sizeof buf, 0);
        if (n <= 0)
            return std::nullopt;
        try {
            auto msg = dns::decode_message(std::span(buf, static_cast<std::size_t>(n)));
            if (msg.response && msg.id == static_cast<std::uint16_t>((request[0] << 8) | request[1]))
                return msg;
        } catch (const dns::WireError&) {
            // Ignore garbage and keep waiting for the real answer.
        }
    }
    return std::nullopt;
}

std::optional<dns::Message> DnsWireResolver::exchange_tcp(const Bytes& request)
{
    auto info = resolve_server(server_, SOCK_STREAM);
    Socket sock(::socket(info.head->ai_family, SOCK_STREAM, 0));
    if (!sock)
        throw ResolutionError(false, "cannot open TCP socket");
    if (::connect(sock.get(), info.head->ai_addr, info.head->ai_addrlen) != 0)
        return std::nullopt;
    Bytes framed;
    framed.push_back(static_cast<std::uint8_t>(request.size() >> 8));
    framed.push_back(static_cast<std::uint8_t>(request.size() & 0xff));
    framed.insert(framed.end(), request.begin(), request.end());
    if (::send(sock.get(), framed.data(), framed.size(), MSG_NOSIGNAL) != static_cast<ssize_t>(framed.size()))
        return std::nullopt;

    auto deadline = std::chrono::steady_clock::now() + timeout_;
    std::uint8_t len_buf[2];
    if (!read_exact(sock.get(), len_buf, 2, deadline))
        return std::nullopt;
    Bytes response((std::size_t{len_buf[0]} << 8) | len_buf[1]);
    if (!read_exact(sock.get(), response.data(), response.size(), deadline))
        return std::nullopt;
    try {
        return dns::decode_message(response);
    } catch (const dns::WireError&) {
        return std::nullopt;
    }
}

QueryResult DnsWireResolver::query(const DomainName& owner, dns::RecordType type)
{
    dns::Message request;
    request.id = next_query_id();
    request.recursion_desired = true;
    request.questions.push_back({owner, type});
    auto wire = dns::encode_message(request);

    std::optional<dns::Message> reply;
    for (int i = 0; i < attempts_ && !reply; ++i)
        reply = exchange_udp(wire);
    if (reply && reply->truncated)
        reply = exchange_tcp(wire);
    if (!reply)
        return QueryResult{QueryStatus::timeout, {}};

    QueryResult result;
    switch (reply->rcode) {
    case dns::Rcode::noerror: result.status = QueryStatus::ok; break;
    case dns::Rcode::nxdomain: result.status = QueryStatus::nxdomain; return result;
    default: result.status = QueryStatus::servfail; return result;
    }
    for (auto& rr : reply->answers) {
        if (rr.type == type)
            result.rdatas.push_back(std::move(rr.rdata));
    }
    return result;
}

} // namespace metapolicy
