// metapolicy: operator and agent command line.

#include "metapolicy/agent.hpp"
#include "metapolicy/canonical.hpp"
#include "metapolicy/fixtures/bench.hpp"
#include "metapolicy/publisher.hpp"
#include "metapolicy/scanner.hpp"
#include "metapolicy/testnet.hpp"
#include "metapolicy/trust.hpp"
#include "metapolicy/zone_file.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace mp = metapolicy;
using json = nlohmann::ordered_json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_hard_failure = 2;
constexpr int exit_verification = 3;
constexpr int exit_resolution = 4;
constexpr int exit_usage = 64;
constexpr int json_schema_version = 1;

struct Globals
{
    std::string resolver;
    std::string root_store;
    std::string cache;
    std::string zone;
    std::string at;
    std::string dnssec_anchors;
    bool json = false;
    bool live = false;
    std::uint32_t ttl = mp::codec::default_ttl;
    unsigned parallelism = 4;
    double qps = 20;
};

class UsageError : public mp::Error
{
public:
    using Error::Error;
};

json envelope(const std::string& command)
{
    json j;
    j["schema_version"] = json_schema_version;
    j["command"] = command;
    return j;
}

void write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw UsageError("cannot write " + path);
    out << content;
}

std::string read_input(const std::string& path)
{
    try {
        return mp::read_file(path);
    } catch (const mp::Error& e) {
        throw UsageError(e.what());
    }
}

std::optional<mp::ResolverAddress> system_resolver()
{
    std::ifstream in("/etc/resolv.conf");
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string key, value;
        ss >> key >> value;
        if (key == "nameserver" && !value.empty())
            return mp::ResolverAddress::parse(value.find(':') != std::string::npos ? "[" + value + "]" : value);
    }
    return std::nullopt;
}

std::shared_ptr<mp::ResolverPort> make_resolver(const Globals& g)
{
    if (!g.zone.empty())
        return mp::testnet::serve(mp::testnet::ZoneFixture::from_master_file(read_input(g.zone)));
    if (!g.resolver.empty())
        return std::make_shared<mp::DnsWireResolver>(mp::ResolverAddress::parse(g.resolver));
    auto sys = system_resolver();
    if (!sys)
        throw UsageError("no resolver: pass --resolver or --zone");
    return std::make_shared<mp::DnsWireResolver>(*sys);
}

mp::trust::TrustConfig make_trust(const Globals& g)
{
    mp::trust::TrustConfig cfg;
    if (!g.root_store.empty())
        cfg.root_store = mp::load_root_store(g.root_store);
    if (!g.at.empty()) {
        auto day = mp::parse_date(g.at);
        if (!day)
            throw UsageError("--at wants mm/dd/yyyy, got '" + g.at + "'");
        cfg.clock = mp::trust::fixed_clock(*day);
    }
    if (!g.dnssec_anchors.empty()) {
        for (const auto& r : mp::dns::parse_master_file(read_input(g.dnssec_anchors)))
            if (r.type == mp::dns::RecordType::DNSKEY)
                cfg.dnssec_anchors[r.owner].push_back(mp::dns::decode_dnskey(r.rdata));
    }
    return cfg;
}

std::shared_ptr<mp::PolicyCache> make_cache(const Globals& g)
{
    std::string path = g.cache;
    if (path.empty())
        if (const char* env = std::getenv("METAPOLICY_CACHE"))
            path = env;
    if (path.empty())
        return std::make_shared<mp::PolicyCache>();
    return std::make_shared<mp::PolicyCache>(path);
}

mp::DomainName domain_arg(const std::string& text)
{
    auto d = mp::DomainName::try_parse(text);
    if (!d)
        throw UsageError("bad domain name '" + text + "'");
    return *d;
}

void emit(const Globals& g, const json& j, const std::string& text)
{
    if (g.json)
        std::cout << j.dump(2) << '\n';
    else if (!text.empty())
        std::cout << text << (text.ends_with('\n') ? "" : "\n");
}

// create

struct CreateArgs
{
    std::string config;
    std::string output;
    std::string previous;
};

int run_create(const Globals& g, const CreateArgs& a)
{
    auto config = mp::publisher::parse_config(read_input(a.config));
    std::optional<mp::Metapolicy> previous;
    if (!a.previous.empty())
        previous = mp::parse(read_input(a.previous));
    auto draft = mp::publisher::build(config, previous ? &*previous : nullptr);
    auto text = mp::signing_input(draft);

    auto j = envelope("create");
    j["domain"] = draft.header.domain.str();
    j["version"] = draft.header.version;
    j["policies"] = draft.policies.size();
    if (a.output.empty()) {
        j["draft"] = text;
        emit(g, j, text);
    } else {
        write_file(a.output, text);
        j["output"] = a.output;
        emit(g, j, fmt::format("wrote draft for {} version {} to {}", draft.header.domain.str(), draft.header.version,
                               a.output));
    }
    return exit_ok;
}

// sign

struct SignArgs
{
    std::string draft;
    std::string key;
    std::string chain;
    std::string output;
    std::string zone_out;
};

int run_sign(const Globals& g, const SignArgs& a)
{
    auto draft = mp::parse_draft(read_input(a.draft));
    auto key = mp::PrivateKey::load(a.key);
    mp::CertificateChain chain;
    if (!a.chain.empty())
        chain = mp::to_chain(mp::load_certificates(a.chain));
    auto result = mp::publisher::finalize(draft, key, chain);
    auto text = mp::canonical_serialize(result.metapolicy);

    std::string zone = mp::publisher::emit_zone_fragment(result.records, g.ttl);
    if (chain.empty())
        zone += mp::dns::format_record(mp::publisher::dnskey_record(draft.header.domain, key.public_key(), g.ttl)) +
                "\n";
    if (!a.zone_out.empty())
        write_file(a.zone_out, zone);

    auto j = envelope("sign");
    j["domain"] = result.metapolicy.header.domain.str();
    j["version"] = result.metapolicy.header.version;
    j["parts"] = result.metapolicy.header.parts;
    j["size"] = text.size();
    j["iterations"] = result.iterations;
    j["mode"] = chain.empty() ? "dnssec" : "certificate";
    if (!a.zone_out.empty())
        j["zone"] = a.zone_out;
    if (a.output.empty()) {
        j["metapolicy"] = text;
        emit(g, j, text);
    } else {
        write_file(a.output, text);
        j["output"] = a.output;
        emit(g, j,
             fmt::format("signed {} version {}: {} bytes in {} part(s)", result.metapolicy.header.domain.str(),
                         result.metapolicy.header.version, text.size(), result.metapolicy.header.parts));
    }
    return exit_ok;
}

// fetch

struct FetchArgs
{
    std::string domain;
    std::string output;
};

int run_fetch(const Globals& g, const FetchArgs& a)
{
    auto domain = domain_arg(a.domain);
    auto resolver = make_resolver(g);
    auto text = mp::fetch_published(domain, *resolver);

    auto j = envelope("fetch");
    j["domain"] = domain.str();
    j["size"] = text.size();
    if (a.output.empty()) {
        j["metapolicy"] = text;
        emit(g, j, text);
    } else {
        write_file(a.output, text);
        j["output"] = a.output;
        emit(g, j, fmt::format("fetched {} bytes for {} into {}", text.size(), domain.str(), a.output));
    }
    return exit_ok;
}

// verify

int run_verify(const Globals& g, const std::string& path)
{
    auto text = read_input(path);
    auto j = envelope("verify");
    mp::Metapolicy m;
    try {
        m = mp::parse(text);
    } catch (const mp::ParseError& e) {
        j["status"] = "malformed";
        j["details"] = e.what();
        emit(g, j, std::string("malformed: ") + e.what());
        return exit_verification;
    }
    auto cfg = make_trust(g);
    std::shared_ptr<mp::ResolverPort> resolver;
    if (m.chain.empty())
        resolver = make_resolver(g);
    auto result = mp::trust::verify(m, cfg, resolver.get());

    j["domain"] = m.header.domain.str();
    j["version"] = m.header.version;
    j["status"] = mp::trust::to_string(result.status);
    j["details"] = result.details;
    std::string line(mp::trust::to_string(result.status));
    if (!result.details.empty() && !result.valid())
        line += ": " + result.details;
    emit(g, j, line);
    return result.valid() ? exit_ok : exit_verification;
}

// enforce

struct EnforceArgs
{
    std::string domain;
    std::uint32_t policy_id = 0;
    std::string context;
    std::string reports;
};

int run_enforce(const Globals& g, const EnforceArgs& a)
{
    auto domain = domain_arg(a.domain);
    mp::AccessContext ctx;
    ctx.domain = domain;
    try {
        auto cj = nlohmann::json::parse(read_input(a.context));
        for (const auto& [k, v] : cj.items())
            ctx.attributes[k] = v.is_string() ? v.get<std::string>() : v.dump();
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("bad context file: ") + e.what());
    }

    std::shared_ptr<mp::ReportSink> sink;
    if (!a.reports.empty())
        sink = std::make_shared<mp::JsonLinesReportSink>(a.reports);
    mp::Agent agent(make_resolver(g), make_trust(g), make_cache(g), sink);

    auto j = envelope("enforce");
    j["domain"] = domain.str();
    j["policy_id"] = a.policy_id;
    std::optional<mp::Metapolicy> m;
    try {
        m = agent.lookup_for_subdomain(domain);
    } catch (const mp::HardFailure& e) {
        j["decision"] = "terminate";
        j["status"] = "hard_failure";
        j["details"] = e.what();
        emit(g, j, std::string("terminate: ") + e.what());
        return exit_hard_failure;
    }
    if (!m) {
        j["status"] = "no_metapolicy";
        emit(g, j, "no metapolicy applies to " + domain.str());
        return exit_resolution;
    }

    auto outcome = agent.enforce(*m, a.policy_id, ctx, mp::EvaluatorRegistry::with_defaults());
    j["decision"] = mp::to_string(outcome.decision);
    j["status"] = mp::to_string(outcome.status);
    j["details"] = outcome.detail;
    json reports = json::array();
    for (const auto& r : outcome.reports)
        reports.push_back(json::parse(mp::to_json_line(r)));
    j["reports"] = reports;
    emit(g, j,
         fmt::format("{} ({}{}{})", mp::to_string(outcome.decision), mp::to_string(outcome.status),
                     outcome.detail.empty() ? "" : ": ", outcome.detail));
    return outcome.decision == mp::Decision::terminate ? exit_hard_failure : exit_ok;
}

// scan

struct ScanArgs
{
    std::string list;
    std::string csv;
    std::string selectors;
    bool tls = false;
};

int run_scan(const Globals& g, const ScanArgs& a)
{
    auto domains = mp::scanner::parse_domain_list(read_input(a.list));
    if (domains.empty())
        throw UsageError("domain list is empty");
    mp::scanner::ScanOptions opts;
    opts.parallelism = g.parallelism;
    opts.qps = g.qps;
    opts.probe_tls = a.tls;
    if (!a.selectors.empty()) {
        opts.dkim_selectors.clear();
        std::istringstream ss(a.selectors);
        for (std::string s; std::getline(ss, s, ',');)
            if (!s.empty())
                opts.dkim_selectors.push_back(s);
    }
    auto resolver = make_resolver(g);
    auto reports = mp::scanner::scan_domains(domains, *resolver, opts);
    auto table = mp::scanner::aggregate(reports);
    if (!a.csv.empty())
        write_file(a.csv, mp::scanner::to_csv(reports));

    auto j = envelope("scan");
    j["total"] = table.total;
    json per = json::object();
    for (std::size_t i = 0; i < mp::scanner::policy_count; ++i)
        per[std::string(mp::scanner::policy_names[i])] = {
            {"count", table.per_policy[i]},
            {"percent", mp::scanner::format_percent(table.percent(table.per_policy[i]))}};
    j["policies"] = per;
    json multi = json::array();
    for (std::size_t k = 0; k < mp::scanner::policy_count; ++k)
        multi.push_back({{"k", k + 1},
                         {"at_least", table.at_least[k]},
                         {"at_least_percent", mp::scanner::format_percent(table.percent(table.at_least[k]))},
                         {"exact", table.exact[k]},
                         {"exact_percent", mp::scanner::format_percent(table.percent(table.exact[k]))}});
    j["multiple"] = multi;
    if (a.tls)
        j["tls"] = {{"count", table.tls}, {"percent", mp::scanner::format_percent(table.percent(table.tls))}};
    std::string text = fmt::format("scanned {} domains\n\n", table.total) + mp::scanner::render_policy_table(table) +
                       "\n" + mp::scanner::render_multi_policy_table(table);
    if (a.tls)
        text += fmt::format("\nTLS {} {}\n", table.tls, mp::scanner::format_percent(table.percent(table.tls)));
    emit(g, j, text);
    return exit_ok;
}

// bench

struct BenchArgs
{
    std::size_t samples = 10;
    std::uint64_t seed = 1;
    std::string live_domain = "example.com";
};

int run_bench(const Globals& g, const BenchArgs& a)
{
    mp::fixtures::BenchOptions opts;
    opts.samples = a.samples;
    opts.seed = a.seed;
    if (g.live) {
        opts.live_resolver = !g.resolver.empty() ? std::optional(mp::ResolverAddress::parse(g.resolver))
                                                 : system_resolver();
        if (!opts.live_resolver)
            throw UsageError("--live needs --resolver or /etc/resolv.conf");
        opts.live_domain = domain_arg(a.live_domain);
    }
    auto r = mp::fixtures::run_bench(opts);

    auto j = envelope("bench");
    j["samples"] = r.samples;
    j["latency_source"] = r.live ? "live" : "testnet";
    j["measured"] = {{"size_bytes", r.avg_size_bytes},
                     {"chain_bytes", r.avg_chain_bytes},
                     {"parts", r.avg_parts},
                     {"fetch_ms_per_part", r.avg_fetch_ms_per_part},
                     {"sequential_fetch_ms", r.avg_sequential_fetch_ms},
                     {"parallel_fetch_ms", r.avg_parallel_fetch_ms},
                     {"verify_ms", r.avg_verify_ms},
                     {"verify_max_ms", r.max_verify_ms}};
    using B = mp::fixtures::BenchBaseline;
    j["reference"] = {{"size_bytes", B::size_kb * 1000},
                      {"chain_bytes", B::chain_kb * 1000},
                      {"parts", B::records},
                      {"fetch_ms_per_part", B::fetch_ms_per_record},
                      {"verify_ms", B::verify_ms}};
    emit(g, j, mp::fixtures::render_bench(r));
    return exit_ok;
}

int report_error(const Globals& g, const std::string& kind, const std::string& message, int code)
{
    if (g.json) {
        auto j = envelope("error");
        j["error"] = kind;
        j["details"] = message;
        std::cout << j.dump(2) << '\n';
    }
    std::cerr << "metapolicy: " << message << '\n';
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Create, publish, fetch, verify and enforce domain metapolicies"};
    app.fallthrough();
    app.require_subcommand(1);

    Globals g;
    app.add_option("--resolver", g.resolver, "DNS server, host[:port]");
    app.add_option("--root-store", g.root_store, "Directory of trusted root certificates (PEM)");
    app.add_option("--cache", g.cache, "Policy cache snapshot (default: $METAPOLICY_CACHE)");
    app.add_option("--zone", g.zone, "Answer DNS from this master file instead of a resolver");
    app.add_option("--at", g.at, "Verification date, mm/dd/yyyy (default: today)");
    app.add_option("--dnssec-anchors", g.dnssec_anchors, "Master file of trusted DNSKEY records");
    app.add_flag("--json", g.json, "Machine-readable output");
    app.add_flag("--live", g.live, "bench: measure latency against a real resolver");
    app.add_option("--ttl", g.ttl, "TTL for emitted records")->check(CLI::NonNegativeNumber);
    app.add_option("--parallelism", g.parallelism, "Concurrent scans")->check(CLI::PositiveNumber);
    app.add_option("--qps", g.qps, "Scanner query rate cap, 0 for none")->check(CLI::NonNegativeNumber);

    CreateArgs create_args;
    auto* create = app.add_subcommand("create", "Build a draft metapolicy from a config file");
    create->add_option("config", create_args.config, "Config file")->required();
    create->add_option("-o,--output", create_args.output, "Draft output (.mpol)");
    create->add_option("--previous", create_args.previous, "Currently published metapolicy, for versioning");

    SignArgs sign_args;
    auto* sign = app.add_subcommand("sign", "Sign a draft and produce publishable records");
    sign->add_option("draft", sign_args.draft, "Draft (.mpol)")->required();
    sign->add_option("--key", sign_args.key, "Private key (PEM or DER)")->required();
    sign->add_option("--chain", sign_args.chain, "Certificate chain, leaf first (PEM); omit for DNSSEC mode");
    sign->add_option("-o,--output", sign_args.output, "Signed metapolicy output (.mpol)");
    sign->add_option("--zone-out", sign_args.zone_out, "Master-file fragment output (.zone)");

    FetchArgs fetch_args;
    auto* fetch = app.add_subcommand("fetch", "Fetch a published metapolicy without verifying it");
    fetch->add_option("domain", fetch_args.domain)->required();
    fetch->add_option("-o,--output", fetch_args.output, "Output (.mpol)");

    std::string verify_path;
    auto* verify = app.add_subcommand("verify", "Verify a signed metapolicy");
    verify->add_option("metapolicy", verify_path, "Signed metapolicy (.mpol)")->required();

    EnforceArgs enforce_args;
    auto* enforce = app.add_subcommand("enforce", "Look up, verify and enforce one policy for an access");
    enforce->add_option("domain", enforce_args.domain)->required();
    enforce->add_option("policy-id", enforce_args.policy_id)->required();
    enforce->add_option("context", enforce_args.context, "Access context (JSON object)")->required();
    enforce->add_option("--reports", enforce_args.reports, "Append report events to this JSON-lines file");

    ScanArgs scan_args;
    auto* scan = app.add_subcommand("scan", "Probe domains for deployed security policies");
    scan->add_option("domains", scan_args.list, "Domain list file")->required();
    scan->add_option("--csv", scan_args.csv, "Per-domain CSV output");
    scan->add_option("--selectors", scan_args.selectors, "DKIM selectors, comma separated");
    scan->add_flag("--tls", scan_args.tls, "Also attempt a TLS handshake on port 443");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Measure size, record count, fetch latency and verification time");
    bench->add_option("--samples", bench_args.samples, "Generated metapolicies")->check(CLI::PositiveNumber);
    bench->add_option("--seed", bench_args.seed);
    bench->add_option("--live-domain", bench_args.live_domain, "Domain whose records are queried with --live");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        auto code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        if (*create)
            return run_create(g, create_args);
        if (*sign)
            return run_sign(g, sign_args);
        if (*fetch)
            return run_fetch(g, fetch_args);
        if (*verify)
            return run_verify(g, verify_path);
        if (*enforce)
            return run_enforce(g, enforce_args);
        if (*scan)
            return run_scan(g, scan_args);
        if (*bench)
            return run_bench(g, bench_args);
    } catch (const mp::HardFailure& e) {
        return report_error(g, "hard_failure", e.what(), exit_hard_failure);
    } catch (const mp::ResolutionError& e) {
        return report_error(g, "resolution", e.what(), exit_resolution);
    } catch (const mp::SignError& e) {
        return report_error(g, "sign", e.what(), exit_usage);
    } catch (const mp::CryptoError& e) {
        return report_error(g, "crypto", e.what(), exit_usage);
    } catch (const mp::ParseError& e) {
        return report_error(g, "parse", e.what(), exit_usage);
    } catch (const mp::Error& e) {
        return report_error(g, "usage", e.what(), exit_usage);
    } catch (const std::exception& e) {
        return report_error(g, "internal", e.what(), 1);
    }
    return exit_usage;
}
