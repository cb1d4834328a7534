#include "support.hpp"

#include "metapolicy/agent.hpp"

#include <gtest/gtest.h>

namespace mp = metapolicy;
namespace pub = metapolicy::publisher;
namespace chr = std::chrono;

namespace {

const char* example_config = R"(# published example
domain = a.com
version = 1
valid_from = 12/09/2016
valid_to = 12/09/2018
subdomains = example.a.com, verbal.a.com

[policy]
id = 7288
specification = v=spf1 a include:aspmx.googlemail.com ~all
fail = hard
report = report@a.com

[policy]
id = 6376
specification = v=DKIM1; k=rsa; p=TAMAfMA0GCSqGSIb3DQLOGE...
fail = soft   # trailing comment
report = report@a.com
)";

std::uint32_t ceil_div_512(std::size_t n)
{
    std::uint32_t k = 0;
    for (std::size_t covered = 0; covered < n; covered += 512)
        ++k;
    return k;
}

} // namespace

TEST(PublisherConfig, ParsesPublishedExample)
{
    auto cfg = pub::parse_config(example_config);
    EXPECT_EQ(pub::build(cfg), mp::fixtures::example_draft());
    EXPECT_EQ(pub::parse_config(pub::render_config(mp::fixtures::example_draft())).policies, cfg.policies);
}

TEST(PublisherConfig, HashInsideValueIsKept)
{
    auto cfg = pub::parse_config("domain = a.com\nvalid_from = 1/1/2020\nvalid_to = 1/1/2021\n"
                                 "[policy]\nid = 1\nspecification = x#y # comment\nreport = a@a.com, b@a.com\n"
                                 "report = c@a.com\n");
    ASSERT_EQ(cfg.policies.size(), 1u);
    EXPECT_EQ(cfg.policies[0].specification, "x#y");
    EXPECT_EQ(cfg.policies[0].fail.mode, mp::FailMode::hard);
    EXPECT_EQ(cfg.policies[0].fail.report_addresses, (std::vector<std::string>{"a@a.com", "b@a.com", "c@a.com"}));
    EXPECT_FALSE(cfg.version);
}

TEST(PublisherConfig, ErrorsNameTheLine)
{
    auto message = [](const std::string& text) {
        try {
            pub::parse_config(text);
        } catch (const mp::ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("accepted");
    };
    EXPECT_EQ(message("domain = a.com\ncolour = red\n"), "config line 2: unknown key 'colour'");
    EXPECT_EQ(message("domain = a.com\nvalid_from = 2020-01-01\n"),
              "config line 2: bad date '2020-01-01' (mm/dd/yyyy)");
    EXPECT_EQ(message("domain = a.com\n\n[policy]\nid = x\n"), "config line 4: 'x' is not a number");
    EXPECT_EQ(message("domain = a.com\n[policy]\nfail = loud\n"), "config line 3: fail must be hard, soft or ignore");
    EXPECT_NE(message("valid_from = 1/1/2020\nvalid_to = 1/1/2021\n").find("domain is required"), std::string::npos);
    EXPECT_NE(message("domain = a.com\nvalid_from = 1/1/2020\nvalid_to = 1/1/2021\n[policy]\nid = 1\n")
                  .find("no specification"),
              std::string::npos);
}

TEST(PublisherBuild, VersionsAndValidation)
{
    auto cfg = pub::parse_config(example_config);
    cfg.version.reset();
    auto first = pub::build(cfg);
    EXPECT_EQ(first.header.version, 1u);

    mp::Metapolicy prev{first.header, first.policies, {}, {}};
    prev.header.version = 4;
    EXPECT_EQ(pub::build(cfg, &prev).header.version, 5u);
    cfg.version = 4;
    EXPECT_THROW(pub::build(cfg, &prev), mp::MonotonicityError);
    cfg.version = 9;
    EXPECT_EQ(pub::build(cfg, &prev).header.version, 9u);

    prev.header.domain = mp::DomainName::parse("b.com");
    EXPECT_THROW(pub::build(cfg, &prev), mp::ConfigError);

    auto bad = pub::parse_config(example_config);
    bad.subdomains.push_back(mp::SubdomainPattern::parse("b.com"));
    EXPECT_THROW(pub::build(bad), mp::ConfigError);
}

TEST(PublisherFinalize, FixpointAtPartBoundaries)
{
    auto domain = mp::DomainName::parse("boundary.example");
    const auto& pki = support::fast_pki(domain.str());
    auto cfg = support::trust_for(pki);
    auto base = pub::finalize(support::sized_draft(domain, 1, 10), pki.leaf.key, pki.chain(false));
    auto base_size = mp::canonical_serialize(base.metapolicy).size();
    // The chain alone fills the first few parts.
    auto first_k = static_cast<std::uint32_t>(base_size / 512 + 1);
    for (std::uint32_t k = first_k; k < first_k + 12; ++k) {
        bool below = false, above = false;
        for (int delta = -3; delta <= 3; ++delta) {
            auto target = static_cast<long>(512 * k) + delta;
            auto filler = static_cast<long>(10) + target - static_cast<long>(base_size);
            if (filler < 1)
                continue;
            auto r = pub::finalize(support::sized_draft(domain, 1, static_cast<std::size_t>(filler)), pki.leaf.key,
                                   pki.chain(false));
            auto text = mp::canonical_serialize(r.metapolicy);
            auto n = ceil_div_512(text.size());
            EXPECT_LE(r.iterations, 2) << "k=" << k << " delta=" << delta;
            EXPECT_EQ(r.metapolicy.header.parts, n) << text.size();
            EXPECT_EQ(r.records.parts.size(), n);
            EXPECT_TRUE(mp::trust::verify(r.metapolicy, cfg).valid());
            std::string joined;
            for (const auto& p : r.records.parts)
                joined += p.payload;
            EXPECT_EQ(joined, text);
            below |= text.size() == 512 * k;
            above |= text.size() == 512 * k + 1;
        }
        // Parts going from 9 to 10 adds a digit, so one of the two sizes is hit.
        EXPECT_TRUE(below || above) << "k=" << k;
    }
}

TEST(PublisherFinalize, RsaSignaturesAndChainsInTheSize)
{
    auto domain = mp::DomainName::parse("rsa.example");
    mp::fixtures::PkiOptions opts;
    opts.label = "Rsa";
    auto pki = mp::fixtures::make_pki(domain, opts);
    EXPECT_EQ(pub::signature_length(pki.leaf.key), 256u);
    EXPECT_EQ(pub::signature_length(pki.root.key), 64u);
    auto r = pub::finalize(support::sized_draft(domain, 1, 300), pki.leaf.key, pki.chain(true));
    EXPECT_EQ(r.metapolicy.signature.value.size(), 256u);
    EXPECT_EQ(r.metapolicy.chain.certificates.size(), 3u);
    EXPECT_EQ(r.metapolicy.header.parts, ceil_div_512(mp::canonical_serialize(r.metapolicy).size()));
    EXPECT_EQ(r.iterations, 1);
    EXPECT_TRUE(mp::trust::verify(r.metapolicy, support::trust_for(pki)).valid());
}

TEST(PublisherBump, AppliesChangesAndStaysMonotonic)
{
    auto prev = mp::parse(support::read_data("example/example.published.mpol"));
    pub::Changes c;
    c.upsert_policies = {{7288, "v=spf1 -all", {mp::FailMode::hard, {}}}, {6797, "max-age=1", {mp::FailMode::soft, {}}}};
    c.remove_policies = {6376};
    c.validity = mp::ValidityWindow{chr::year{2017} / 1 / 1, chr::year{2019} / 1 / 1};
    auto d = pub::bump_version(prev, c);
    EXPECT_EQ(d.header.version, 2u);
    EXPECT_EQ(d.header.validity.valid_to, chr::year{2019} / 1 / 1);
    ASSERT_EQ(d.policies.size(), 2u);
    EXPECT_EQ(d.policies[0].specification, "v=spf1 -all");
    EXPECT_EQ(d.policies[1].id, 6797u);
    EXPECT_EQ(d.header.subdomains, prev.header.subdomains);

    c = {};
    c.version = 1;
    EXPECT_THROW(pub::bump_version(prev, c), mp::MonotonicityError);
    c.version = 10;
    EXPECT_EQ(pub::bump_version(prev, c).header.version, 10u);
}

TEST(PublisherZone, FragmentRoundTripsThroughTestnet)
{
    auto domain = mp::DomainName::parse("zone.example");
    const auto& pki = support::fast_pki(domain.str());
    auto r = pub::finalize(support::sized_draft(domain, 3, 1800), pki.leaf.key, pki.chain(false));
    auto fragment = pub::emit_zone_fragment(r.records, 900);
    std::size_t lines = std::count(fragment.begin(), fragment.end(), '\n');
    EXPECT_EQ(lines, r.records.parts.size());
    EXPECT_TRUE(fragment.starts_with("_metapolicy.zone.example. 900 IN TXT \""));

    auto net = mp::testnet::serve(mp::testnet::ZoneFixture::from_master_file(fragment));
    mp::Agent agent(net, support::trust_for(pki), nullptr);
    EXPECT_EQ(agent.lookup(domain), r.metapolicy);
}

TEST(PublisherZone, DnssecModeRecord)
{
    auto domain = mp::DomainName::parse("dnssec-pub.example");
    auto key = mp::PrivateKey::generate(mp::SignatureAlgorithm::ed25519);
    auto rec = pub::dnskey_record(domain, key.public_key(), 600);
    EXPECT_EQ(rec.owner, domain);
    EXPECT_EQ(rec.type, mp::dns::RecordType::DNSKEY);
    auto rdata = mp::dns::decode_dnskey(rec.rdata);
    EXPECT_EQ(rdata.algorithm, 15);
    EXPECT_EQ(rdata.flags, 257);

    auto r = pub::finalize(support::sized_draft(domain, 1), key);
    EXPECT_TRUE(r.metapolicy.chain.empty());
    mp::testnet::ZoneFixture zone;
    zone.publish(r.records);
    zone.add(rec);
    auto net = mp::testnet::serve(std::move(zone));
    auto cfg = support::trust_for(support::fast_pki(domain.str()));
    cfg.dnssec_anchors[domain] = {rdata};
    mp::Agent agent(net, cfg, nullptr);
    EXPECT_EQ(agent.lookup(domain), r.metapolicy);
}
