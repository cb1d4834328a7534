#pragma once

#include "metapolicy/crypto.hpp"
#include "metapolicy/domain_name.hpp"
#include "metapolicy/errors.hpp"
#include "metapolicy/model.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Minimal DNS message and RDATA codec for the record types this project
// touches: A, TXT, DNSKEY, TLSA and CAA.
namespace metapolicy::dns {

enum class RecordType : std::uint16_t {
    A = 1,
    TXT = 16,
    DNSKEY = 48,
    TLSA = 52,
    CAA = 257,
};

std::string to_string(RecordType type);
std::optional<RecordType> parse_record_type(std::string_view token) noexcept;

enum class Rcode : std::uint8_t {
    noerror = 0,
    formerr = 1,
    servfail = 2,
    nxdomain = 3,
    notimp = 4,
    refused = 5,
};

class WireError : public Error
{
public:
    using Error::Error;
};

using TxtStrings = std::vector<std::string>;

Bytes encode_txt(const TxtStrings& strings);
TxtStrings decode_txt(std::span<const std::uint8_t> rdata);
std::string join(const TxtStrings& strings);

Bytes encode_dnskey(const DnskeyRdata& key);
DnskeyRdata decode_dnskey(std::span<const std::uint8_t> rdata);

struct CaaRdata
{
    std::uint8_t flags = 0;
    std::string tag;
    std::string value;

    friend bool operator==(const CaaRdata&, const CaaRdata&) = default;
};

Bytes encode_caa(const CaaRdata& caa);
CaaRdata decode_caa(std::span<const std::uint8_t> rdata);

struct TlsaRdata
{
    std::uint8_t usage = 3;
    std::uint8_t selector = 1;
    std::uint8_t matching_type = 1;
    Bytes data;

    friend bool operator==(const TlsaRdata&, const TlsaRdata&) = default;
};

Bytes encode_tlsa(const TlsaRdata& tlsa);
TlsaRdata decode_tlsa(std::span<const std::uint8_t> rdata);

Bytes encode_a(std::string_view dotted_quad);
std::string decode_a(std::span<const std::uint8_t> rdata);

struct Question
{
    DomainName name;
    RecordType type = RecordType::TXT;
};

struct WireRecord
{
    DomainName owner;
    RecordType type = RecordType::TXT;
    std::uint32_t ttl = 0;
    Bytes rdata;
};

struct Message
{
    std::uint16_t id = 0;
    bool response = false;
    bool authoritative = false;
    bool truncated = false;
    bool recursion_desired = true;
    bool recursion_available = false;
    Rcode rcode = Rcode::noerror;
    std::vector<Question> questions;
    std::vector<WireRecord> answers;
};

Bytes encode_message(const Message& msg);
// Decodes header, questions and the answer section; authority and additional
// sections are skipped.
Message decode_message(std::span<const std::uint8_t> wire);

} // namespace metapolicy::dns
