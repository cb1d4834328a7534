#include "metapolicy/fixtures/generators.hpp"

#include "metapolicy/canonical.hpp"
#include "metapolicy/codec.hpp"
#include "metapolicy/encoding.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace metapolicy::fixtures {

namespace chr = std::chrono;

namespace {

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi)
{
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::string random_label(std::mt19937_64& rng)
{
    static constexpr std::string_view alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
    std::string out;
    auto len = uniform(rng, 1, 12);
    for (std::size_t i = 0; i < len; ++i)
        out.push_back(alphabet[uniform(rng, 0, i == 0 ? 25 : alphabet.size() - 1)]);
    return out;
}

Bytes random_bytes(std::mt19937_64& rng, std::size_t n)
{
    Bytes out(n);
    for (auto& b : out)
        b = static_cast<std::uint8_t>(rng());
    return out;
}

} // namespace

Draft example_draft()
{
    Draft d;
    d.header.domain = DomainName::parse("a.com");
    d.header.version = 1;
    d.header.validity = {chr::year{2016} / 12 / 9, chr::year{2018} / 12 / 9};
    d.header.parts = 1;
    d.header.subdomains = {SubdomainPattern::parse("example.a.com"), SubdomainPattern::parse("verbal.a.com")};
    d.policies.push_back({7288, "v=spf1 a include:aspmx.googlemail.com ~all", {FailMode::hard, {"report@a.com"}}});
    d.policies.push_back({6376, "v=DKIM1; k=rsa; p=TAMAfMA0GCSqGSIb3DQLOGE...", {FailMode::soft, {"report@a.com"}}});
    return d;
}

std::string random_specification(std::mt19937_64& rng, std::size_t length)
{
    std::string out;
    out.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
        bool edge = i == 0 || i + 1 == length;
        // Printable ASCII; blanks only in the interior.
        out.push_back(static_cast<char>(uniform(rng, edge ? 0x21 : 0x20, 0x7e)));
    }
    return out;
}

Draft random_draft(std::mt19937_64& rng, const RandomDraftOptions& opts)
{
    Draft d;
    std::string domain = random_label(rng) + "." + (uniform(rng, 0, 1) ? "com" : random_label(rng) + ".org");
    d.header.domain = DomainName::parse(domain);
    d.header.version = static_cast<std::uint32_t>(uniform(rng, 1, 100000));
    auto from = chr::sys_days(chr::year{2000} / 1 / 1) + chr::days(uniform(rng, 0, 12000));
    auto to = from + chr::days(uniform(rng, 0, 3000));
    d.header.validity = {chr::year_month_day(from), chr::year_month_day(to)};
    d.header.parts = 1;

    auto subs = uniform(rng, 0, 3);
    for (std::size_t i = 0; i < subs; ++i) {
        SubdomainPattern p;
        p.wildcard = uniform(rng, 0, 3) == 0;
        p.base = p.wildcard && uniform(rng, 0, 1) ? d.header.domain : d.header.domain.prepend(random_label(rng));
        d.header.subdomains.push_back(p);
    }

    auto count = uniform(rng, opts.min_policies, opts.max_policies);
    std::uint32_t id = static_cast<std::uint32_t>(uniform(rng, 1, 5000));
    for (std::size_t i = 0; i < count; ++i) {
        PolicyEntry p;
        p.id = id;
        id += static_cast<std::uint32_t>(uniform(rng, 1, 3000));
        p.specification = random_specification(rng, uniform(rng, opts.min_spec_length, opts.max_spec_length));
        p.fail.mode = static_cast<FailMode>(uniform(rng, 0, 2));
        auto reports = uniform(rng, 0, 2);
        for (std::size_t r = 0; r < reports; ++r)
            p.fail.report_addresses.push_back(random_label(rng) + "@" + d.header.domain.str());
        d.policies.push_back(std::move(p));
    }
    return d;
}

void fit_parts(Metapolicy& m)
{
    for (int i = 0; i < 8; ++i) {
        auto n = codec::parts_needed(canonical_serialize(m).size());
        if (n == m.header.parts)
            return;
        m.header.parts = n;
    }
}

Metapolicy random_metapolicy(std::mt19937_64& rng, std::size_t target_size)
{
    RandomDraftOptions opts;
    opts.max_policies = 3;
    opts.max_spec_length = 60;
    const bool small = target_size < 1000;
    if (small) {
        opts.max_policies = 1;
        opts.max_spec_length = 16;
    }
    Draft d = random_draft(rng, opts);

    Metapolicy m;
    m.header = d.header;
    m.policies = d.policies;
    if (small)
        m.header.subdomains.clear();
    auto alg = static_cast<SignatureAlgorithm>(uniform(rng, small ? 1 : 0, 2));
    m.signature = {alg, random_bytes(rng, alg == SignatureAlgorithm::rsa_pkcs1_sha256 ? 256 : 64)};

    // Grow towards the target with certificate blobs and one long policy.
    auto size = canonical_serialize(m).size();
    if (size < target_size) {
        auto budget = target_size - size;
        auto certs = budget > 600 ? uniform(rng, 1, 3) : 0;
        auto cert_share = certs ? budget / 2 : 0;
        for (std::size_t i = 0; i < certs; ++i) {
            // base64 grows 4/3; ", " separators cost 2 bytes each.
            auto raw = std::max<std::size_t>(1, (cert_share / certs) * 3 / 4);
            m.chain.certificates.push_back(random_bytes(rng, raw));
        }
        size = canonical_serialize(m).size();
        if (size + 40 < target_size) {
            auto next_id = m.policies.back().id + 1;
            PolicyEntry filler{next_id, "x", {FailMode::soft, {}}};
            m.policies.push_back(filler);
            auto with_filler = canonical_serialize(m).size();
            m.policies.back().specification = random_specification(rng, target_size - with_filler + 1);
        }
    }
    fit_parts(m);
    return m;
}

Draft typical_email_draft(const DomainName& domain, std::mt19937_64& rng)
{
    Draft d;
    d.header.domain = domain;
    d.header.version = 1;
    d.header.validity = {chr::year{2024} / 1 / 1, chr::year{2030} / 12 / 31};
    d.header.parts = 1;
    d.header.subdomains = {SubdomainPattern::parse("*." + domain.str())};
    auto report = "postmaster@" + domain.str();
    d.policies.push_back({7208, "v=spf1 a mx include:_spf." + domain.str() + " ~all", {FailMode::hard, {report}}});
    // A DKIM TXT record body for a 2048-bit RSA key is ~400 base64 characters.
    d.policies.push_back(
        {6376, "v=DKIM1; k=rsa; p=" + base64_encode(random_bytes(rng, 294)), {FailMode::soft, {report}}});
    d.policies.push_back({7489, "v=DMARC1; p=reject; rua=mailto:" + report + "; pct=100", {FailMode::soft, {report}}});
    return d;
}

ScanFixture scan_fixture(std::uint64_t seed)
{
    static constexpr std::array<std::size_t, 6> counts = {56, 47, 10, 3, 1, 0};
    static constexpr std::array<std::string_view, 5> selectors = {"default", "selector1", "selector2", "google", "k1"};
    constexpr std::size_t n = 100;
    std::mt19937_64 rng(seed);

    ScanFixture fx;
    for (std::size_t i = 0; i < n; ++i)
        fx.domains.push_back({DomainName::parse(fmt::format("site{:03}.scan.example", i + 1)), {}});
    for (std::size_t p = 0; p < counts.size(); ++p) {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i)
            order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t j = 0; j < counts[p]; ++j)
            fx.domains[order[j]].flags[p] = true;
    }

    auto txt = [&](const DomainName& owner, const std::string& text) {
        fx.records.push_back({owner, 3600, dns::RecordType::TXT, dns::encode_txt(codec::split_character_strings(text))});
    };
    for (std::size_t i = 0; i < n; ++i) {
        const auto& d = fx.domains[i];
        const auto& f = d.flags;
        fx.records.push_back(
            {d.domain, 3600, dns::RecordType::A, dns::encode_a(fmt::format("192.0.2.{}", i + 1))});
        if (f[0])
            txt(d.domain, fmt::format("v=spf1 ip4:192.0.2.{} include:_spf.scan.example ~all", i + 1));
        else if (i % 3 == 0)
            txt(d.domain, "google-site-verification=" + base64_encode(random_bytes(rng, 24)));
        if (f[1]) {
            auto sel = selectors[uniform(rng, 0, selectors.size() - 1)];
            txt(d.domain.prepend("_domainkey").prepend(sel),
                "v=DKIM1; k=rsa; p=" + base64_encode(random_bytes(rng, 162)));
        } else if (i % 4 == 1) {
            txt(d.domain.prepend("_domainkey").prepend("s1024"), "v=DKIM1; k=rsa; p=" + base64_encode(random_bytes(rng, 162)));
        }
        if (f[2])
            txt(d.domain.prepend("_dmarc"), "v=DMARC1; p=quarantine; rua=mailto:dmarc@" + d.domain.str());
        else if (i % 5 == 2)
            txt(d.domain.prepend("_dmarc"), "legacy-verification=1");
        if (f[3])
            fx.records.push_back({d.domain, 3600, dns::RecordType::DNSKEY,
                                  dns::encode_dnskey({257, 3, 13, random_bytes(rng, 64)})});
        if (f[4])
            fx.records.push_back({d.domain, 3600, dns::RecordType::CAA, dns::encode_caa({0, "issue", "letsencrypt.org"})});
        if (f[5])
            fx.records.push_back({d.domain.prepend("_tcp").prepend("_443"), 3600, dns::RecordType::TLSA,
                                  dns::encode_tlsa({3, 1, 1, random_bytes(rng, 32)})});
    }
    return fx;
}

std::string ScanFixture::zone_text() const
{
    std::string out;
    for (const auto& r : records)
        out += dns::format_record(r) + "\n";
    return out;
}

std::string ScanFixture::domain_list() const
{
    std::string out;
    for (std::size_t i = 0; i < domains.size(); ++i)
        out += fmt::format("{},{}\n", i + 1, domains[i].domain.str());
    return out;
}

} // namespace metapolicy::fixtures
