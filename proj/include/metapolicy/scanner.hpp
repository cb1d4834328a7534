#pragma once

#include "metapolicy/resolver.hpp"

#include <array>
#include <chrono>
#include <mutex>
#include <string>
#include <vector>

// Measures which security policies domains already publish in DNS.
namespace metapolicy::scanner {

inline constexpr std::size_t policy_count = 6;
inline constexpr std::array<std::string_view, policy_count> policy_names = {"SPF",    "DKIM", "DMARC",
                                                                            "DNSSEC", "CAA",  "DANE"};

struct ScanReport
{
    DomainName domain;
    bool spf = false;
    bool dkim = false;
    bool dmarc = false;
    bool dnssec = false;
    bool caa = false;
    bool dane = false;
    // Only probed when ScanOptions::probe_tls is set; not one of the six.
    bool tls = false;
    std::vector<std::string> error_notes;

    // Flags in policy_names order.
    std::array<bool, policy_count> flags() const { return {spf, dkim, dmarc, dnssec, caa, dane}; }
    std::size_t policies_supported() const;
};

struct ScanOptions
{
    std::vector<std::string> dkim_selectors = {"default", "selector1", "selector2", "google", "k1"};
    bool probe_tls = false;
    std::chrono::milliseconds tls_timeout{3000};
    // Queries per second across all workers; 0 disables the cap.
    double qps = 20;
    unsigned parallelism = 4;
};

// Spaces acquisitions at least 1/qps apart. Thread safe.
class RateLimiter
{
public:
    explicit RateLimiter(double qps);
    void acquire();

private:
    std::mutex mutex_;
    std::chrono::steady_clock::duration interval_;
    std::chrono::steady_clock::time_point next_;
};

// Probe set, in order: TXT at d (SPF), TXT at <selector>._domainkey.d until
// the first hit (DKIM), TXT at _dmarc.d (DMARC), DNSKEY at d, CAA at d, TLSA
// at _443._tcp.d. Probe failures become notes; flags stay false.
ScanReport scan_domain(const DomainName& domain, ResolverPort& resolver, const ScanOptions& options = {},
                       RateLimiter* limiter = nullptr);

// Reports come back in input order.
std::vector<ScanReport> scan_domains(const std::vector<DomainName>& domains, ResolverPort& resolver,
                                     const ScanOptions& options = {});

struct AggregateTable
{
    std::size_t total = 0;
    std::array<std::size_t, policy_count> per_policy{};
    // Index k - 1 for k = 1..6.
    std::array<std::size_t, policy_count> at_least{};
    std::array<std::size_t, policy_count> exact{};
    std::size_t tls = 0;

    double percent(std::size_t count) const;
};

AggregateTable aggregate(const std::vector<ScanReport>& reports);

// "56.00%"
std::string format_percent(double percent);

std::string render_policy_table(const AggregateTable& t);
std::string render_multi_policy_table(const AggregateTable& t);

std::string csv_header();
std::string to_csv_row(const ScanReport& r);
std::string to_csv(const std::vector<ScanReport>& reports);

// One domain per line; blank lines and `#` comments skipped. Alexa-style
// "rank,domain" lines keep the last field.
std::vector<DomainName> parse_domain_list(std::string_view text);

// TLS handshake to host:443.
bool probe_tls(const DomainName& domain, std::chrono::milliseconds timeout);

} // namespace metapolicy::scanner
