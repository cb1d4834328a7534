#include "support.hpp"

#include "metapolicy/evaluators.hpp"

#include <gtest/gtest.h>

#include <random>

namespace mp = metapolicy;
namespace spf = metapolicy::spf;
namespace dns = metapolicy::dns;

namespace {

std::string dotted(std::uint32_t v)
{
    return std::to_string(v >> 24) + "." + std::to_string((v >> 16) & 255) + "." + std::to_string((v >> 8) & 255) +
           "." + std::to_string(v & 255);
}

std::shared_ptr<mp::testnet::TestnetResolver> spf_zone()
{
    mp::testnet::ZoneFixture zone;
    auto n = [](const char* s) { return mp::DomainName::parse(s); };
    zone.add(n("a.com"), dns::RecordType::A, dns::encode_a("198.51.100.10"));
    zone.add_txt(n("aspmx.googlemail.com"), std::string_view("v=spf1 ip4:203.0.113.0/24 -all"));
    zone.add_txt(n("_spf.b.com"), std::string_view("v=spf1 ip6:2001:db8::/32 ~all"));
    zone.add_txt(n("loop.com"), std::string_view("v=spf1 include:loop.com -all"));
    zone.add_txt(n("redir.com"), std::string_view("v=spf1 redirect=aspmx.googlemail.com"));
    return mp::testnet::serve(std::move(zone));
}

} // namespace

TEST(IpNetwork, MatchesIntegerMaskOracle)
{
    std::mt19937 rng(1);
    for (int i = 0; i < 20000; ++i) {
        std::uint32_t ip = rng(), net = rng();
        unsigned len = rng() % 33;
        if (i % 2)
            net = ip ^ (1u << (rng() % 32));
        std::uint32_t mask = len == 0 ? 0 : ~std::uint32_t{0} << (32 - len);
        bool expected = (ip & mask) == (net & mask);
        ASSERT_EQ(mp::ip_in_network(dotted(ip), dotted(net) + "/" + std::to_string(len)), expected)
            << dotted(ip) << " in " << dotted(net) << "/" << len;
    }
    EXPECT_TRUE(mp::ip_in_network("2001:db8::1", "2001:db8::/32"));
    EXPECT_FALSE(mp::ip_in_network("2001:db9::1", "2001:db8::/32"));
    EXPECT_FALSE(mp::ip_in_network("192.0.2.1", "2001:db8::/32"));
    EXPECT_TRUE(mp::ip_in_network("192.0.2.1", "192.0.2.1"));
    EXPECT_FALSE(mp::ip_in_network("192.0.2.1", "192.0.2.0/33"));
}

TEST(Spf, PublishedExampleRecord)
{
    auto net = spf_zone();
    auto a = mp::DomainName::parse("a.com");
    const char* record = "v=spf1 a include:aspmx.googlemail.com ~all";
    EXPECT_EQ(spf::check_host(record, "198.51.100.10", a, net.get()), spf::Result::pass);
    EXPECT_EQ(spf::check_host(record, "203.0.113.77", a, net.get()), spf::Result::pass);
    EXPECT_EQ(spf::check_host(record, "192.0.2.1", a, net.get()), spf::Result::softfail);
}

TEST(Spf, QualifiersModifiersAndErrors)
{
    auto net = spf_zone();
    auto a = mp::DomainName::parse("a.com");
    EXPECT_EQ(spf::check_host("v=spf1 -ip4:192.0.2.0/24 +all", "192.0.2.5", a, net.get()), spf::Result::fail);
    EXPECT_EQ(spf::check_host("v=spf1 ?all", "192.0.2.5", a, net.get()), spf::Result::neutral);
    EXPECT_EQ(spf::check_host("v=spf1 ip4:10.0.0.0/8", "192.0.2.5", a, net.get()), spf::Result::neutral);
    EXPECT_EQ(spf::check_host("v=spf1 redirect=redir.com", "203.0.113.1", a, net.get()), spf::Result::pass);
    EXPECT_EQ(spf::check_host("v=spf1 include:_spf.b.com -all", "2001:db8::5", a, net.get()), spf::Result::pass);
    EXPECT_EQ(spf::check_host("v=spf1 include:nothing.example -all", "192.0.2.5", a, net.get()), spf::Result::permerror);
    EXPECT_EQ(spf::check_host("v=spf1 include:loop.com -all", "192.0.2.5", a, net.get()), spf::Result::permerror);
    EXPECT_EQ(spf::check_host("v=spf2 -all", "192.0.2.5", a, net.get()), spf::Result::permerror);
    EXPECT_EQ(spf::check_host("v=spf1 mx ptr exists:x.a.com -all", "198.51.100.10", a, net.get()), spf::Result::fail);
    EXPECT_EQ(spf::check_host("v=spf1 a -all", "198.51.100.10", a, nullptr), spf::Result::temperror);
}

TEST(Spf, TenLookupLimit)
{
    auto net = spf_zone();
    auto a = mp::DomainName::parse("a.com");
    std::string ten = "v=spf1", eleven = "v=spf1";
    for (int i = 0; i < 10; ++i)
        ten += " a:a.com/1";
    eleven = ten + " a:a.com/1";
    // a:a.com/1 never matches 0.0.0.1 against 198.x; every term costs a lookup.
    EXPECT_EQ(spf::check_host(ten + " -all", "0.0.0.1", a, net.get()), spf::Result::fail);
    EXPECT_EQ(spf::check_host(eleven + " -all", "0.0.0.1", a, net.get()), spf::Result::permerror);
}

TEST(Caa, IssueAndIssuewild)
{
    mp::PolicyEntry p{6844, "0 issue \"letsencrypt.org\" 0 issuewild \"digicert.com\" 0 iodef \"mailto:x@a.com\"", {}};
    mp::AccessContext ctx{mp::DomainName::parse("a.com"), {{"ca_domain", "letsencrypt.org"}}, nullptr};
    EXPECT_TRUE(mp::evaluate_caa(p, ctx).passed);
    ctx.attributes["ca_domain"] = "digicert.com";
    EXPECT_FALSE(mp::evaluate_caa(p, ctx).passed);
    ctx.attributes["wildcard"] = "true";
    EXPECT_TRUE(mp::evaluate_caa(p, ctx).passed);
    ctx.attributes["ca_domain"] = "letsencrypt.org";
    EXPECT_FALSE(mp::evaluate_caa(p, ctx).passed);

    mp::PolicyEntry open{6844, "0 iodef \"mailto:x@a.com\"", {}};
    EXPECT_TRUE(mp::evaluate_caa(open, ctx).passed);
    mp::PolicyEntry broken{6844, "0 issue", {}};
    EXPECT_FALSE(mp::evaluate_caa(broken, ctx).passed);
}

TEST(Https, SchemeAttribute)
{
    mp::PolicyEntry p{6797, "max-age=31536000", {}};
    mp::AccessContext ctx{mp::DomainName::parse("a.com"), {{"scheme", "HTTPS"}}, nullptr};
    EXPECT_TRUE(mp::evaluate_https_required(p, ctx).passed);
    ctx.attributes["scheme"] = "http";
    EXPECT_FALSE(mp::evaluate_https_required(p, ctx).passed);
    ctx.attributes.clear();
    EXPECT_FALSE(mp::evaluate_https_required(p, ctx).passed);
}

TEST(Registry, Defaults)
{
    auto r = mp::EvaluatorRegistry::with_defaults();
    for (std::uint32_t id : {7208u, 7288u, 6844u, 8659u, 6797u})
        EXPECT_NE(r.find(id), nullptr) << id;
    EXPECT_EQ(r.find(6376), nullptr);
    r.add(6376, [](const mp::PolicyEntry&, const mp::AccessContext&) { return mp::Evaluation{true, "ok"}; });
    EXPECT_NE(r.find(6376), nullptr);
}
