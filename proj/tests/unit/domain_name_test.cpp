#include "metapolicy/domain_name.hpp"
#include "metapolicy/errors.hpp"

#include <gtest/gtest.h>

using metapolicy::DomainName;
using metapolicy::InvalidName;
using metapolicy::SubdomainPattern;
using metapolicy::WildcardMode;

TEST(DomainName, NormalisesCaseAndTrailingDot)
{
    auto d = DomainName::parse("Example.A.COM.");
    EXPECT_EQ(d.str(), "example.a.com");
    EXPECT_EQ(d.fqdn(), "example.a.com.");
    EXPECT_EQ(d.labels().size(), 3u);
    EXPECT_EQ(d, DomainName::parse("example.a.com"));
}

TEST(DomainName, RejectsMalformedNames)
{
    for (const char* bad : {"", ".", "a..com", "-a.com", "a-.com", "a b.com", "a.com..", "exa*mple.com"})
        EXPECT_THROW(DomainName::parse(bad), InvalidName) << bad;
    EXPECT_THROW(DomainName::parse(std::string(64, 'a') + ".com"), InvalidName);
    EXPECT_FALSE(DomainName::try_parse("a..b").has_value());
}

TEST(DomainName, ServiceLabelsAreNamesButNotHostnames)
{
    auto owner = DomainName::parse("_metapolicy.a.com");
    EXPECT_FALSE(owner.is_hostname());
    EXPECT_TRUE(DomainName::parse("a.com").is_hostname());
    EXPECT_EQ(DomainName::parse("_443._tcp.a.com").labels().front(), "_443");
}

TEST(DomainName, AncestryIsStrict)
{
    auto a = DomainName::parse("a.com");
    EXPECT_TRUE(DomainName::parse("x.a.com").is_subdomain_of(a));
    EXPECT_TRUE(DomainName::parse("y.x.a.com").is_subdomain_of(a));
    EXPECT_FALSE(a.is_subdomain_of(a));
    EXPECT_FALSE(DomainName::parse("xa.com").is_subdomain_of(a));
    EXPECT_EQ(DomainName::parse("x.a.com").parent(), a);
    EXPECT_EQ(a.prepend("x"), DomainName::parse("x.a.com"));
}

TEST(SubdomainPattern, ExactEntriesMatchOnlyThemselves)
{
    auto p = SubdomainPattern::parse("example.a.com");
    EXPECT_FALSE(p.wildcard);
    EXPECT_TRUE(p.matches(DomainName::parse("example.a.com")));
    EXPECT_FALSE(p.matches(DomainName::parse("other.a.com")));
    EXPECT_FALSE(p.matches(DomainName::parse("x.example.a.com")));
}

TEST(SubdomainPattern, WildcardIsSingleLabelByDefault)
{
    auto p = SubdomainPattern::parse("*.a.com");
    EXPECT_TRUE(p.wildcard);
    EXPECT_EQ(p.str(), "*.a.com");
    EXPECT_TRUE(p.matches(DomainName::parse("x.a.com")));
    EXPECT_FALSE(p.matches(DomainName::parse("x.y.a.com")));
    EXPECT_TRUE(p.matches(DomainName::parse("x.y.a.com"), WildcardMode::multi_label));
    EXPECT_FALSE(p.matches(DomainName::parse("a.com"), WildcardMode::multi_label));
}

TEST(SubdomainPattern, BareStarIsRejected)
{
    EXPECT_THROW(SubdomainPattern::parse("*"), InvalidName);
    EXPECT_THROW(SubdomainPattern::parse("a.*.com"), InvalidName);
}
