#include "metapolicy/fixtures/bench.hpp"

#include "metapolicy/agent.hpp"
#include "metapolicy/canonical.hpp"
#include "metapolicy/fixtures/generators.hpp"
#include "metapolicy/fixtures/pki.hpp"
#include "metapolicy/publisher.hpp"
#include "metapolicy/testnet.hpp"
#include "metapolicy/trust.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace metapolicy::fixtures {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

} // namespace

BenchReport run_bench(const BenchOptions& options)
{
    BenchReport report;
    report.live = options.live_resolver.has_value();
    std::mt19937_64 rng(options.seed);
    std::shared_ptr<ResolverPort> live;
    if (options.live_resolver)
        live = std::make_shared<DnsWireResolver>(*options.live_resolver);

    double size = 0, chain = 0, parts = 0, per_part = 0, sequential = 0, parallel = 0, verify = 0;
    std::size_t part_queries = 0;
    for (std::size_t i = 0; i < options.samples; ++i) {
        auto domain = DomainName::parse(fmt::format("bench{}.example", i));
        PkiOptions po;
        po.rsa_bits = options.rsa_bits;
        po.ca_algorithm = SignatureAlgorithm::rsa_pkcs1_sha256;
        po.label = fmt::format("Bench {}", i);
        auto pki = make_pki(domain, po);

        auto draft = typical_email_draft(domain, rng);
        auto result = publisher::finalize(draft, pki.leaf.key, pki.chain(true));
        auto text = canonical_serialize(result.metapolicy);
        size += static_cast<double>(text.size());
        for (const auto& der : result.metapolicy.chain.certificates)
            chain += static_cast<double>(der.size());
        parts += result.metapolicy.header.parts;

        trust::TrustConfig cfg;
        cfg.root_store = pki.root_store();

        ResolverPort* port = live.get();
        std::shared_ptr<testnet::TestnetResolver> net;
        if (!port) {
            testnet::ZoneFixture zone;
            zone.publish(result.records);
            net = testnet::serve(std::move(zone));
            port = net.get();
        }

        auto t0 = Clock::now();
        for (std::uint32_t p = 1; p <= result.metapolicy.header.parts; ++p) {
            auto owner = live ? codec::owner_name_for_part(p, options.live_domain)
                              : codec::owner_name_for_part(p, domain);
            auto q0 = Clock::now();
            port->query(owner, dns::RecordType::TXT);
            per_part += ms_since(q0);
            ++part_queries;
        }
        sequential += ms_since(t0);

        if (!live) {
            auto p0 = Clock::now();
            auto fetched = fetch_published(domain, *port);
            parallel += ms_since(p0);
            if (fetched != text)
                throw Error("bench: fetched metapolicy differs from the published one");
        }

        auto v0 = Clock::now();
        auto verdict = trust::verify(result.metapolicy, cfg);
        auto v = ms_since(v0);
        if (!verdict.valid())
            throw Error("bench: generated metapolicy does not verify: " + verdict.details);
        verify += v;
        report.max_verify_ms = std::max(report.max_verify_ms, v);
    }

    auto n = static_cast<double>(std::max<std::size_t>(options.samples, 1));
    report.samples = options.samples;
    report.avg_size_bytes = size / n;
    report.avg_chain_bytes = chain / n;
    report.avg_parts = parts / n;
    report.avg_fetch_ms_per_part = part_queries ? per_part / static_cast<double>(part_queries) : 0;
    report.avg_sequential_fetch_ms = sequential / n;
    report.avg_parallel_fetch_ms = parallel / n;
    report.avg_verify_ms = verify / n;
    return report;
}

std::string render_bench(const BenchReport& r)
{
    std::string out;
    out += fmt::format("samples                 {}\n", r.samples);
    out += fmt::format("{:<24}{:>12}{:>12}\n", "", "measured", "reference");
    out += fmt::format("{:<24}{:>12.2f}{:>12.2f}\n", "metapolicy size (KB)", r.avg_size_bytes / 1000,
                       BenchBaseline::size_kb);
    out += fmt::format("{:<24}{:>12.2f}{:>12.2f}\n", "certificate chain (KB)", r.avg_chain_bytes / 1000,
                       BenchBaseline::chain_kb);
    out += fmt::format("{:<24}{:>12.1f}{:>12.0f}\n", "TXT records", r.avg_parts, BenchBaseline::records);
    out += fmt::format("{:<24}{:>12.3f}{:>12.0f}\n", "fetch per record (ms)", r.avg_fetch_ms_per_part,
                       BenchBaseline::fetch_ms_per_record);
    out += fmt::format("{:<24}{:>12.3f}{:>12}\n", "sequential fetch (ms)", r.avg_sequential_fetch_ms, "");
    if (!r.live)
        out += fmt::format("{:<24}{:>12.3f}{:>12}\n", "parallel fetch (ms)", r.avg_parallel_fetch_ms, "");
    out += fmt::format("{:<24}{:>12.3f}{:>12.0f}\n", "verification (ms)", r.avg_verify_ms, BenchBaseline::verify_ms);
    out += fmt::format("{:<24}{:>12.3f}{:>12}\n", "verification max (ms)", r.max_verify_ms, "");
    out += fmt::format("latency source          {}\n", r.live ? "live resolver" : "in-process testnet");
    return out;
}

} // namespace metapolicy::fixtures
