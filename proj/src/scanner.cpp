#include "metapolicy/scanner.hpp"

#include "metapolicy/errors.hpp"

#include <fmt/format.h>
#include <netdb.h>
#include <openssl/ssl.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fcntl.h>
#include <thread>

namespace metapolicy::scanner {

using dns::RecordType;

std::size_t ScanReport::policies_supported() const
{
    auto f = flags();
    return static_cast<std::size_t>(std::count(f.begin(), f.end(), true));
}

RateLimiter::RateLimiter(double qps)
    : interval_(qps > 0 ? std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(1.0 / qps))
                        : std::chrono::steady_clock::duration::zero())
    , next_(std::chrono::steady_clock::now())
{}

void RateLimiter::acquire()
{
    if (interval_ == std::chrono::steady_clock::duration::zero())
        return;
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(mutex_);
        auto now = std::chrono::steady_clock::now();
        slot = std::max(now, next_);
        next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
}

namespace {

bool starts_with_nocase(std::string_view text, std::string_view prefix)
{
    if (text.size() < prefix.size())
        return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(text[i])) != std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    return true;
}

class Prober
{
public:
    Prober(ResolverPort& resolver, RateLimiter* limiter, ScanReport& report)
        : resolver_(resolver)
        , limiter_(limiter)
        , report_(report)
    {}

    // Empty on failure, with a note.
    std::optional<QueryResult> query(const DomainName& owner, RecordType type)
    {
        if (limiter_)
            limiter_->acquire();
        try {
            auto r = resolver_.query(owner, type);
            if (r.status == QueryStatus::servfail || r.status == QueryStatus::timeout) {
                note(owner, type, std::string(to_string(r.status)));
                return std::nullopt;
            }
            return r;
        } catch (const std::exception& e) {
            note(owner, type, e.what());
            return std::nullopt;
        }
    }

    bool txt_with_prefix(const DomainName& owner, std::string_view prefix)
    {
        auto r = query(owner, RecordType::TXT);
        if (!r)
            return false;
        for (const auto& rdata : r->rdatas) {
            try {
                if (starts_with_nocase(dns::join(dns::decode_txt(rdata)), prefix))
                    return true;
            } catch (const dns::WireError& e) {
                note(owner, RecordType::TXT, e.what());
            }
        }
        return false;
    }

    bool any_record(const DomainName& owner, RecordType type)
    {
        auto r = query(owner, type);
        return r && !r->rdatas.empty();
    }

    void note(const DomainName& owner, RecordType type, const std::string& what)
    {
        report_.error_notes.push_back(fmt::format("{} {}: {}", dns::to_string(type), owner.str(), what));
    }

private:
    ResolverPort& resolver_;
    RateLimiter* limiter_;
    ScanReport& report_;
};

} // namespace

ScanReport scan_domain(const DomainName& domain, ResolverPort& resolver, const ScanOptions& options,
                       RateLimiter* limiter)
{
    ScanReport report;
    report.domain = domain;
    Prober probe(resolver, limiter, report);

    report.spf = probe.txt_with_prefix(domain, "v=spf1");
    for (const auto& selector : options.dkim_selectors) {
        auto owner = DomainName::try_parse(selector + "._domainkey." + domain.str());
        if (!owner) {
            report.error_notes.push_back("bad DKIM selector '" + selector + "'");
            continue;
        }
        if (probe.any_record(*owner, RecordType::TXT)) {
            report.dkim = true;
            break;
        }
    }
    if (!report.dkim)
        report.error_notes.push_back("no DKIM key under the probed selectors");
    report.dmarc = probe.txt_with_prefix(domain.prepend("_dmarc"), "v=DMARC1");
    report.dnssec = probe.any_record(domain, RecordType::DNSKEY);
    report.caa = probe.any_record(domain, RecordType::CAA);
    report.dane = probe.any_record(domain.prepend("_tcp").prepend("_443"), RecordType::TLSA);
    if (options.probe_tls)
        report.tls = probe_tls(domain, options.tls_timeout);
    return report;
}

std::vector<ScanReport> scan_domains(const std::vector<DomainName>& domains, ResolverPort& resolver,
                                     const ScanOptions& options)
{
    std::vector<ScanReport> out(domains.size());
    RateLimiter limiter(options.qps);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (auto i = next++; i < domains.size(); i = next++)
            out[i] = scan_domain(domains[i], resolver, options, &limiter);
    };
    auto n = std::clamp<std::size_t>(options.parallelism, 1, std::max<std::size_t>(domains.size(), 1));
    std::vector<std::thread> threads;
    for (std::size_t i = 1; i < n; ++i)
        threads.emplace_back(worker);
    worker();
    for (auto& t : threads)
        t.join();
    return out;
}

double AggregateTable::percent(std::size_t count) const
{
    return total ? 100.0 * static_cast<double>(count) / static_cast<double>(total) : 0.0;
}

AggregateTable aggregate(const std::vector<ScanReport>& reports)
{
    if (reports.empty())
        throw PreconditionError("aggregate needs at least one scan report");
    AggregateTable t;
    t.total = reports.size();
    for (const auto& r : reports) {
        auto f = r.flags();
        for (std::size_t i = 0; i < policy_count; ++i)
            t.per_policy[i] += f[i];
        auto k = r.policies_supported();
        if (k > 0)
            ++t.exact[k - 1];
        t.tls += r.tls;
    }
    std::size_t running = 0;
    for (std::size_t k = policy_count; k-- > 0;) {
        running += t.exact[k];
        t.at_least[k] = running;
    }
    return t;
}

std::string format_percent(double percent)
{
    return fmt::format("{:.2f}%", percent);
}

std::string render_policy_table(const AggregateTable& t)
{
    std::string out = fmt::format("{:<8} {:>12} {:>11}\n", "Policy", "Supporting", "Percentage");
    for (std::size_t i = 0; i < policy_count; ++i)
        out += fmt::format("{:<8} {:>12} {:>11}\n", policy_names[i], t.per_policy[i],
                           format_percent(t.percent(t.per_policy[i])));
    return out;
}

std::string render_multi_policy_table(const AggregateTable& t)
{
    std::string out = fmt::format("{:<12} {:>10} {:>11}   {:>10} {:>10} {:>11}\n", "# Policies", "# Domains",
                                  "Percentage", "# Policies", "# Domains", "Percentage");
    for (std::size_t k = 0; k < policy_count; ++k)
        out += fmt::format("{:<12} {:>10} {:>11}   {:>10} {:>10} {:>11}\n", fmt::format("At least {}", k + 1),
                           t.at_least[k], format_percent(t.percent(t.at_least[k])), k + 1, t.exact[k],
                           format_percent(t.percent(t.exact[k])));
    return out;
}

std::string csv_header()
{
    return "domain,spf,dkim,dmarc,dnssec,caa,dane,tls,notes";
}

namespace {

std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

std::string to_csv_row(const ScanReport& r)
{
    std::string notes;
    for (const auto& n : r.error_notes)
        notes += (notes.empty() ? "" : "; ") + n;
    return fmt::format("{},{},{},{},{},{},{},{},{}", r.domain.str(), int(r.spf), int(r.dkim), int(r.dmarc),
                       int(r.dnssec), int(r.caa), int(r.dane), int(r.tls), csv_escape(notes));
}

std::string to_csv(const std::vector<ScanReport>& reports)
{
    std::string out = csv_header() + "\n";
    for (const auto& r : reports)
        out += to_csv_row(r) + "\n";
    return out;
}

std::vector<DomainName> parse_domain_list(std::string_view text)
{
    std::vector<DomainName> out;
    std::size_t lineno = 0;
    while (!text.empty()) {
        ++lineno;
        auto eol = text.find('\n');
        std::string line(text.substr(0, eol));
        text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (auto comma = line.rfind(','); comma != std::string::npos)
            line.erase(0, comma + 1);
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos)
            continue;
        auto e = line.find_last_not_of(" \t\r");
        auto name = line.substr(b, e - b + 1);
        auto d = DomainName::try_parse(name);
        if (!d)
            throw ConfigError(fmt::format("domain list line {}: bad domain '{}'", lineno, name));
        out.push_back(*d);
    }
    return out;
}

bool probe_tls(const DomainName& domain, std::chrono::milliseconds timeout)
{
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* head = nullptr;
    if (getaddrinfo(domain.str().c_str(), "443", &hints, &head) != 0 || !head)
        return false;

    bool ok = false;
    for (auto* ai = head; ai && !ok; ai = ai->ai_next) {
        int fd = ::socket(ai->ai_family, ai->ai_socktype, 0);
        if (fd < 0)
            continue;
        timeval tv{static_cast<time_t>(timeout.count() / 1000), static_cast<suseconds_t>(timeout.count() % 1000 * 1000)};
        ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
        ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
            SSL_CTX* ctx = SSL_CTX_new(TLS_client_method());
            SSL* ssl = ctx ? SSL_new(ctx) : nullptr;
            if (ssl) {
                SSL_set_fd(ssl, fd);
                SSL_set_tlsext_host_name(ssl, domain.str().c_str());
                ok = SSL_connect(ssl) == 1;
                SSL_free(ssl);
            }
            SSL_CTX_free(ctx);
        }
        ::close(fd);
    }
    freeaddrinfo(head);
    return ok;
}

} // namespace metapolicy::scanner
