#include "metapolicy/dns_wire.hpp"
#include "metapolicy/zone_file.hpp"

#include <gtest/gtest.h>

namespace mp = metapolicy;
namespace dns = metapolicy::dns;

TEST(DnsWire, TxtRdataIsLengthPrefixed)
{
    auto rdata = dns::encode_txt({"ab", "", "c"});
    EXPECT_EQ(rdata, (mp::Bytes{2, 'a', 'b', 0, 1, 'c'}));
    EXPECT_EQ(dns::decode_txt(rdata), (dns::TxtStrings{"ab", "", "c"}));
    EXPECT_EQ(dns::join(dns::decode_txt(rdata)), "abc");
    EXPECT_THROW(dns::encode_txt({std::string(256, 'x')}), dns::WireError);
    EXPECT_THROW(dns::decode_txt(mp::Bytes{5, 'a'}), dns::WireError);
}

TEST(DnsWire, CaaAndTlsaAndARoundTrip)
{
    dns::CaaRdata caa{0, "issue", "letsencrypt.org"};
    auto c = dns::encode_caa(caa);
    EXPECT_EQ(c[0], 0);
    EXPECT_EQ(c[1], 5);
    EXPECT_EQ(dns::decode_caa(c), caa);

    dns::TlsaRdata tlsa{3, 1, 1, mp::Bytes(32, 0xab)};
    auto t = dns::encode_tlsa(tlsa);
    EXPECT_EQ(t.size(), 35u);
    EXPECT_EQ(dns::decode_tlsa(t), tlsa);

    EXPECT_EQ(dns::encode_a("192.0.2.1"), (mp::Bytes{192, 0, 2, 1}));
    EXPECT_EQ(dns::decode_a(mp::Bytes{10, 0, 0, 7}), "10.0.0.7");
    EXPECT_THROW(dns::encode_a("300.1.1.1"), dns::WireError);
}

TEST(DnsWire, MessageRoundTrip)
{
    dns::Message m;
    m.id = 0x1234;
    m.response = true;
    m.authoritative = true;
    m.rcode = dns::Rcode::nxdomain;
    m.questions.push_back({mp::DomainName::parse("_metapolicy.a.com"), dns::RecordType::TXT});
    m.answers.push_back({mp::DomainName::parse("_metapolicy.a.com"), dns::RecordType::TXT, 60, dns::encode_txt({"x"})});
    auto wire = dns::encode_message(m);
    // Header: id, flags (QR|AA, rcode 3, RD), 1 question, 1 answer.
    EXPECT_EQ(wire[0], 0x12);
    EXPECT_EQ(wire[1], 0x34);
    EXPECT_EQ(wire[2], 0x85);
    EXPECT_EQ(wire[3] & 0x0f, 3);
    EXPECT_EQ(wire[5], 1);
    EXPECT_EQ(wire[7], 1);

    auto back = dns::decode_message(wire);
    EXPECT_EQ(back.id, 0x1234);
    EXPECT_TRUE(back.response);
    EXPECT_TRUE(back.authoritative);
    EXPECT_EQ(back.rcode, dns::Rcode::nxdomain);
    ASSERT_EQ(back.questions.size(), 1u);
    EXPECT_EQ(back.questions[0].name.str(), "_metapolicy.a.com");
    ASSERT_EQ(back.answers.size(), 1u);
    EXPECT_EQ(back.answers[0].ttl, 60u);
    EXPECT_EQ(dns::decode_txt(back.answers[0].rdata), dns::TxtStrings{"x"});
}

TEST(DnsWire, DecodesCompressedNames)
{
    // Hand-assembled response with the answer owner as a pointer to offset 12.
    mp::Bytes wire = {0, 1, 0x81, 0x80, 0, 1, 0, 1, 0, 0, 0, 0,
                      1, 'a', 3, 'c', 'o', 'm', 0, 0, 1, 0, 1,
                      0xc0, 12, 0, 1, 0, 1, 0, 0, 0, 30, 0, 4, 192, 0, 2, 9};
    auto m = dns::decode_message(wire);
    ASSERT_EQ(m.answers.size(), 1u);
    EXPECT_EQ(m.answers[0].owner.str(), "a.com");
    EXPECT_EQ(m.answers[0].type, dns::RecordType::A);
    EXPECT_EQ(dns::decode_a(m.answers[0].rdata), "192.0.2.9");
}

TEST(DnsWire, RejectsTruncatedAndLoopingMessages)
{
    EXPECT_THROW(dns::decode_message(mp::Bytes{0, 1, 0}), dns::WireError);
    mp::Bytes loop = {0, 1, 0x81, 0x80, 0, 1, 0, 0, 0, 0, 0, 0, 0xc0, 12, 0, 1, 0, 1};
    EXPECT_THROW(dns::decode_message(loop), dns::WireError);
}

TEST(ZoneFile, DirectivesRelativeNamesAndContinuations)
{
    const char* text = "$ORIGIN a.com.\n"
                       "$TTL 300\n"
                       "@ IN TXT \"v=spf1 -all\" ; comment\n"
                       "_metapolicy IN TXT \"part \\\"one\\\"\" \"more\"\n"
                       "  600 IN CAA 0 issue \"ca.example\"\n"
                       "www 60 IN A 192.0.2.1\n"
                       "_443._tcp.www IN TLSA ( 3 1 1\n"
                       "   ABCDEF01 )\n";
    auto records = dns::parse_master_file(text);
    ASSERT_EQ(records.size(), 5u);
    EXPECT_EQ(records[0].owner.str(), "a.com");
    EXPECT_EQ(records[0].ttl, 300u);
    EXPECT_EQ(dns::decode_txt(records[0].rdata), dns::TxtStrings{"v=spf1 -all"});
    EXPECT_EQ(records[1].owner.str(), "_metapolicy.a.com");
    EXPECT_EQ(dns::decode_txt(records[1].rdata), (dns::TxtStrings{"part \"one\"", "more"}));
    EXPECT_EQ(records[2].owner.str(), "_metapolicy.a.com");
    EXPECT_EQ(records[2].ttl, 600u);
    EXPECT_EQ(dns::decode_caa(records[2].rdata), (dns::CaaRdata{0, "issue", "ca.example"}));
    EXPECT_EQ(records[3].ttl, 60u);
    EXPECT_EQ(records[4].owner.str(), "_443._tcp.www.a.com");
    EXPECT_EQ(dns::decode_tlsa(records[4].rdata).data, (mp::Bytes{0xab, 0xcd, 0xef, 0x01}));
}

TEST(ZoneFile, FormatThenParseIsIdentity)
{
    std::vector<dns::ZoneRecord> records = {
        {mp::DomainName::parse("a.com"), 300, dns::RecordType::TXT, dns::encode_txt({"with \"quotes\" and \\", "\x01"})},
        {mp::DomainName::parse("a.com"), 300, dns::RecordType::CAA, dns::encode_caa({128, "iodef", "mailto:x@a.com"})},
        {mp::DomainName::parse("a.com"), 300, dns::RecordType::DNSKEY,
         dns::encode_dnskey({257, 3, 13, mp::Bytes(64, 7)})},
    };
    std::string text;
    for (const auto& r : records)
        text += dns::format_record(r) + "\n";
    EXPECT_EQ(dns::parse_master_file(text), records);
}

TEST(ZoneFile, ErrorsCarryLineNumbers)
{
    try {
        dns::parse_master_file("a.com. IN TXT \"ok\"\na.com. IN MX 10 mail\n");
        FAIL();
    } catch (const dns::ZoneParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(dns::parse_master_file("www IN A 192.0.2.1\n"), dns::ZoneParseError);
}
