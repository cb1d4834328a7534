#include "support.hpp"

#include "metapolicy/codec.hpp"

#include <gtest/gtest.h>

#include <random>

namespace mp = metapolicy;
namespace codec = metapolicy::codec;

namespace {

// Smallest k with 512k >= s, found by counting rather than dividing.
std::uint32_t oracle_parts(std::size_t s)
{
    std::uint32_t k = 0;
    std::size_t covered = 0;
    while (covered < s) {
        covered += 512;
        ++k;
    }
    return k;
}

} // namespace

TEST(PartsNeeded, PublishedExample)
{
    EXPECT_EQ(codec::parts_needed(5400), 11u);
}

TEST(PartsNeeded, MatchesCountingOracleUpTo100000)
{
    for (std::size_t s = 1; s <= 100000; ++s)
        ASSERT_EQ(codec::parts_needed(s), oracle_parts(s)) << s;
}

TEST(PartsNeeded, BoundariesAndEmpty)
{
    EXPECT_EQ(codec::parts_needed(512), 1u);
    EXPECT_EQ(codec::parts_needed(513), 2u);
    EXPECT_EQ(codec::parts_needed(1024), 2u);
    EXPECT_THROW(codec::parts_needed(0), mp::CodecError);
}

TEST(OwnerNames, PartOneHasNoIndexLabel)
{
    auto a = mp::DomainName::parse("a.com");
    EXPECT_EQ(codec::owner_name_for_part(1, a).str(), "_metapolicy.a.com");
    EXPECT_EQ(codec::owner_name_for_part(2, a).str(), "2._metapolicy.a.com");
    EXPECT_EQ(codec::owner_name_for_part(11, a).str(), "11._metapolicy.a.com");
    EXPECT_THROW(codec::owner_name_for_part(0, a), mp::CodecError);
}

TEST(OwnerNames, ClassifyIsInverse)
{
    auto a = mp::DomainName::parse("mail.a.com");
    for (std::uint32_t i = 1; i < 40; ++i) {
        auto owner = codec::classify_owner(codec::owner_name_for_part(i, a));
        ASSERT_TRUE(owner);
        EXPECT_EQ(owner->domain, a);
        EXPECT_EQ(owner->index, i);
    }
    EXPECT_FALSE(codec::classify_owner(mp::DomainName::parse("a.com")));
    EXPECT_FALSE(codec::classify_owner(mp::DomainName::parse("1._metapolicy.a.com")));
    EXPECT_FALSE(codec::classify_owner(mp::DomainName::parse("02._metapolicy.a.com")));
    EXPECT_FALSE(codec::classify_owner(mp::DomainName::parse("x._metapolicy.a.com")));
}

TEST(CharacterStrings, SplitAt255)
{
    std::string payload(512, 'q');
    payload[254] = 'A';
    payload[255] = 'B';
    auto s = codec::split_character_strings(payload);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0].size(), 255u);
    EXPECT_EQ(s[1].size(), 255u);
    EXPECT_EQ(s[2].size(), 2u);
    EXPECT_EQ(s[0].back(), 'A');
    EXPECT_EQ(s[1].front(), 'B');
    EXPECT_EQ(codec::split_character_strings("").size(), 1u);
}

TEST(Quoting, EscapesQuotesBackslashesAndControlBytes)
{
    EXPECT_EQ(codec::quote_character_string("plain"), "\"plain\"");
    EXPECT_EQ(codec::quote_character_string("a\"b\\c"), "\"a\\\"b\\\\c\"");
    EXPECT_EQ(codec::quote_character_string("x\ny"), "\"x\\010y\"");
    EXPECT_EQ(codec::quote_character_string(std::string(1, '\xff')), "\"\\255\"");
}

TEST(Encapsulate, PositionalSplitConcatenatesBack)
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        auto m = mp::fixtures::random_metapolicy(rng, 100 + rng() % 8000);
        auto text = mp::canonical_serialize(m);
        auto set = codec::encapsulate(m);
        ASSERT_EQ(set.parts.size(), oracle_parts(text.size()));
        std::string joined;
        for (std::size_t k = 0; k < set.parts.size(); ++k) {
            const auto& p = set.parts[k];
            ASSERT_EQ(p.index, k + 1);
            ASSERT_LE(p.payload.size(), 512u);
            ASSERT_EQ(p.owner, codec::owner_name_for_part(p.index, m.header.domain));
            joined += p.payload;
        }
        ASSERT_EQ(joined, text);
        std::shuffle(set.parts.begin(), set.parts.end(), rng);
        ASSERT_EQ(codec::reassemble(set), text);
    }
}

TEST(Encapsulate, DeclaredPartsMustMatch)
{
    auto d = support::sized_draft(mp::DomainName::parse("a.com"), 1, 900);
    mp::Metapolicy m{d.header, d.policies, {mp::SignatureAlgorithm::ed25519, mp::Bytes(64, 1)}, {}};
    m.header.parts = 1;
    try {
        codec::encapsulate(m);
        FAIL();
    } catch (const mp::CodecError& e) {
        EXPECT_EQ(e.kind(), mp::CodecError::Kind::parts_mismatch);
    }
}

TEST(Reassemble, ReportsMissingExtraAndOversizeParts)
{
    std::mt19937_64 rng(5);
    auto m = mp::fixtures::random_metapolicy(rng, 2000);
    auto set = codec::encapsulate(m);
    ASSERT_GE(set.parts.size(), 3u);

    auto kind_of = [](const codec::TxtRecordSet& s) {
        try {
            codec::reassemble(s);
        } catch (const mp::CodecError& e) {
            return std::pair{e.kind(), e.index()};
        }
        return std::pair{mp::CodecError::Kind::empty_input, 999u};
    };

    auto missing = set;
    missing.parts.erase(missing.parts.begin() + 1);
    EXPECT_EQ(kind_of(missing), std::pair(mp::CodecError::Kind::missing_part, 2u));

    auto no_first = set;
    no_first.parts.erase(no_first.parts.begin());
    EXPECT_EQ(kind_of(no_first), std::pair(mp::CodecError::Kind::missing_part, 1u));

    auto extra = set;
    extra.parts.push_back({static_cast<std::uint32_t>(set.parts.size() + 1), {}, "x"});
    EXPECT_EQ(kind_of(extra).first, mp::CodecError::Kind::count_mismatch);

    auto big = set;
    big.parts.back().payload.append(600, 'x');
    EXPECT_EQ(kind_of(big).first, mp::CodecError::Kind::oversize_part);

    auto dup = set;
    dup.parts.push_back(set.parts[1]);
    EXPECT_EQ(kind_of(dup).first, mp::CodecError::Kind::malformed);
}

TEST(MasterFile, OneLinePerPartInOrder)
{
    std::mt19937_64 rng(9);
    auto m = mp::fixtures::random_metapolicy(rng, 1300);
    auto set = codec::encapsulate(m);
    std::reverse(set.parts.begin(), set.parts.end());
    auto text = codec::to_master_file(set, 300);
    auto records = mp::dns::parse_master_file(text);
    ASSERT_EQ(records.size(), set.parts.size());
    std::string joined;
    for (std::size_t i = 0; i < records.size(); ++i) {
        EXPECT_EQ(records[i].owner, codec::owner_name_for_part(static_cast<std::uint32_t>(i + 1), m.header.domain));
        EXPECT_EQ(records[i].ttl, 300u);
        joined += mp::dns::join(mp::dns::decode_txt(records[i].rdata));
    }
    EXPECT_EQ(joined, mp::canonical_serialize(m));
}
