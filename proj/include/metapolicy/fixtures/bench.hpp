#pragma once

#include "metapolicy/resolver.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace metapolicy::fixtures {

struct BenchOptions
{
    std::size_t samples = 10;
    std::uint64_t seed = 1;
    unsigned rsa_bits = 2048;
    // Measure TXT latency against this resolver instead of the in-process
    // testnet.
    std::optional<ResolverAddress> live_resolver;
    DomainName live_domain = DomainName::parse("example.com");
};

struct BenchReport
{
    std::size_t samples = 0;
    double avg_size_bytes = 0;
    double avg_chain_bytes = 0;
    double avg_parts = 0;
    double avg_fetch_ms_per_part = 0;
    double avg_sequential_fetch_ms = 0;
    double avg_parallel_fetch_ms = 0;
    double avg_verify_ms = 0;
    double max_verify_ms = 0;
    bool live = false;
};

// Published reference numbers the measurements are printed next to.
struct BenchBaseline
{
    static constexpr double size_kb = 5.4;
    static constexpr double chain_kb = 4.75;
    static constexpr double records = 11;
    static constexpr double fetch_ms_per_record = 20;
    static constexpr double verify_ms = 4;
};

// Builds `samples` SPF + DKIM + DMARC metapolicies signed under a
// three-certificate chain, publishes them on a testnet and measures size,
// part count, per-part fetch latency and chain + signature verification.
BenchReport run_bench(const BenchOptions& options = {});

std::string render_bench(const BenchReport& report);

} // namespace metapolicy::fixtures
