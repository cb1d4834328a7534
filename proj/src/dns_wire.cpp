#include "metapolicy/dns_wire.hpp"

#include "metapolicy/errors.hpp"

#include <arpa/inet.h>

#include <charconv>

namespace metapolicy::dns {

namespace {

constexpr std::uint16_t class_in = 1;
constexpr std::size_t header_size = 12;
constexpr int max_pointer_hops = 32;

void put16(Bytes& out, std::uint16_t v)
{
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

void put32(Bytes& out, std::uint32_t v)
{
    put16(out, static_cast<std::uint16_t>(v >> 16));
    put16(out, static_cast<std::uint16_t>(v & 0xffff));
}

void put_name(Bytes& out, const DomainName& name)
{
    for (const auto& label : name.labels()) {
        out.push_back(static_cast<std::uint8_t>(label.size()));
        out.insert(out.end(), label.begin(), label.end());
    }
    out.push_back(0);
}

class Reader
{
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8()
    {
        need(1);
        return data_[pos_++];
    }

    std::uint16_t u16()
    {
        need(2);
        auto v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
        pos_ += 2;
        return v;
    }

    std::uint32_t u32()
    {
        std::uint32_t hi = u16();
        return (hi << 16) | u16();
    }

    std::span<const std::uint8_t> take(std::size_t n)
    {
        need(n);
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    DomainName name()
    {
        std::string text;
        std::size_t pos = pos_;
        bool jumped = false;
        int hops = 0;
        while (true) {
            if (pos >= data_.size())
                throw WireError("truncated name");
            std::uint8_t len = data_[pos];
            if ((len & 0xc0) == 0xc0) {
                if (pos + 1 >= data_.size() || ++hops > max_pointer_hops)
                    throw WireError("bad compression pointer");
                std::size_t target = (std::size_t{len & 0x3fu} << 8) | data_[pos + 1];
                if (!jumped)
                    pos_ = pos + 2;
                jumped = true;
                pos = target;
                continue;
            }
            if (len & 0xc0)
                throw WireError("unsupported label type");
            ++pos;
            if (len == 0)
                break;
            if (pos + len > data_.size())
                throw WireError("truncated label");
            if (!text.empty())
                text.push_back('.');
            text.append(reinterpret_cast<const char*>(data_.data() + pos), len);
            pos += len;
        }
        if (!jumped)
            pos_ = pos;
        if (text.empty())
            return DomainName{};
        try {
            return DomainName::parse(text);
        } catch (const InvalidName& e) {
            throw WireError(std::string("unsupported owner name: ") + e.what());
        }
    }

    std::size_t remaining() const noexcept { return data_.size() - pos_; }

private:
    void need(std::size_t n) const
    {
        if (pos_ + n > data_.size())
            throw WireError("truncated message");
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

} // namespace

std::string to_string(RecordType type)
{
    switch (type) {
    case RecordType::A: return "A";
    case RecordType::TXT: return "TXT";
    case RecordType::DNSKEY: return "DNSKEY";
    case RecordType::TLSA: return "TLSA";
    case RecordType::CAA: return "CAA";
    }
    return "TYPE" + std::to_string(static_cast<unsigned>(type));
}

std::optional<RecordType> parse_record_type(std::string_view token) noexcept
{
    for (auto t : {RecordType::A, RecordType::TXT, RecordType::DNSKEY, RecordType::TLSA, RecordType::CAA}) {
        if (token == to_string(t))
            return t;
    }
    return std::nullopt;
}

Bytes encode_txt(const TxtStrings& strings)
{
    Bytes out;
    for (const auto& s : strings) {
        if (s.size() > 255)
            throw WireError("TXT character-string longer than 255 bytes");
        out.push_back(static_cast<std::uint8_t>(s.size()));
        out.insert(out.end(), s.begin(), s.end());
    }
    if (strings.empty())
        out.push_back(0);
    return out;
}

TxtStrings decode_txt(std::span<const std::uint8_t> rdata)
{
    TxtStrings out;
    Reader r(rdata);
    while (r.remaining() > 0) {
        auto len = r.u8();
        auto bytes = r.take(len);
        out.emplace_back(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    }
    return out;
}

std::string join(const TxtStrings& strings)
{
    std::string out;
    for (const auto& s : strings)
        out += s;
    return out;
}

Bytes encode_dnskey(const DnskeyRdata& key)
{
    Bytes out;
    put16(out, key.flags);
    out.push_back(key.protocol);
    out.push_back(key.algorithm);
    out.insert(out.end(), key.public_key.begin(), key.public_key.end());
    return out;
}

DnskeyRdata decode_dnskey(std::span<const std::uint8_t> rdata)
{
    Reader r(rdata);
    DnskeyRdata out;
    out.flags = r.u16();
    out.protocol = r.u8();
    out.algorithm = r.u8();
    auto key = r.take(r.remaining());
    out.public_key.assign(key.begin(), key.end());
    return out;
}

Bytes encode_caa(const CaaRdata& caa)
{
    if (caa.tag.empty() || caa.tag.size() > 255)
        throw WireError("CAA tag must be 1-255 bytes");
    Bytes out;
    out.push_back(caa.flags);
    out.push_back(static_cast<std::uint8_t>(caa.tag.size()));
    out.insert(out.end(), caa.tag.begin(), caa.tag.end());
    out.insert(out.end(), caa.value.begin(), caa.value.end());
    return out;
}

CaaRdata decode_caa(std::span<const std::uint8_t> rdata)
{
    Reader r(rdata);
    CaaRdata out;
    out.flags = r.u8();
    auto tag = r.take(r.u8());
    out.tag.assign(tag.begin(), tag.end());
    auto value = r.take(r.remaining());
    out.value.assign(value.begin(), value.end());
    return out;
}

Bytes encode_tlsa(const TlsaRdata& tlsa)
{
    Bytes out;
    out.reserve(3 + tlsa.data.size());
    out.push_back(tlsa.usage);
    out.push_back(tlsa.selector);
    out.push_back(tlsa.matching_type);
    out.insert(out.end(), tlsa.data.begin(), tlsa.data.end());
    return out;
}

TlsaRdata decode_tlsa(std::span<const std::uint8_t> rdata)
{
    Reader r(rdata);
    TlsaRdata out;
    out.usage = r.u8();
    out.selector = r.u8();
    out.matching_type = r.u8();
    auto data = r.take(r.remaining());
    out.data.assign(data.begin(), data.end());
    return out;
}

Bytes encode_a(std::string_view dotted_quad)
{
    std::string s(dotted_quad);
    in_addr addr{};
    if (inet_pton(AF_INET, s.c_str(), &addr) != 1)
        throw WireError("bad IPv4 address '" + s + "'");
    const auto* p = reinterpret_cast<const std::uint8_t*>(&addr);
    return Bytes(p, p + 4);
}

std::string decode_a(std::span<const std::uint8_t> rdata)
{
    if (rdata.size() != 4)
        throw WireError("A record must be 4 bytes");
    char buf[INET_ADDRSTRLEN];
    inet_ntop(AF_INET, rdata.data(), buf, sizeof buf);
    return buf;
}

Bytes encode_message(const Message& msg)
{
    Bytes out;
    out.reserve(512);
    put16(out, msg.id);
    std::uint16_t flags = 0;
    if (msg.response)
        flags |= 0x8000;
    if (msg.authoritative)
        flags |= 0x0400;
    if (msg.truncated)
        flags |= 0x0200;
    if (msg.recursion_desired)
        flags |= 0x0100;
    if (msg.recursion_available)
        flags |= 0x0080;
    flags |= static_cast<std::uint16_t>(msg.rcode) & 0x000f;
    put16(out, flags);
    put16(out, static_cast<std::uint16_t>(msg.questions.size()));
    put16(out, static_cast<std::uint16_t>(msg.answers.size()));
    put16(out, 0);
    put16(out, 0);
    for (const auto& q : msg.questions) {
        put_name(out, q.name);
        put16(out, static_cast<std::uint16_t>(q.type));
        put16(out, class_in);
    }
    for (const auto& rr : msg.answers) {
        if (rr.rdata.size() > 0xffff)
            throw WireError("RDATA too large");
        put_name(out, rr.owner);
        put16(out, static_cast<std::uint16_t>(rr.type));
        put16(out, class_in);
        put32(out, rr.ttl);
        put16(out, static_cast<std::uint16_t>(rr.rdata.size()));
        out.insert(out.end(), rr.rdata.begin(), rr.rdata.end());
    }
    return out;
}

Message decode_message(std::span<const std::uint8_t> wire)
{
    if (wire.size() < header_size)
        throw WireError("message shorter than a DNS header");
    Reader r(wire);
    Message msg;
    msg.id = r.u16();
    auto flags = r.u16();
    msg.response = flags & 0x8000;
    msg.authoritative = flags & 0x0400;
    msg.truncated = flags & 0x0200;
    msg.recursion_desired = flags & 0x0100;
    msg.recursion_available = flags & 0x0080;
    msg.rcode = static_cast<Rcode>(flags & 0x000f);
    auto qdcount = r.u16();
    auto ancount = r.u16();
    r.u16();
    r.u16();
    for (std::uint16_t i = 0; i < qdcount; ++i) {
        Question q;
        q.name = r.name();
        q.type = static_cast<RecordType>(r.u16());
        r.u16();
        msg.questions.push_back(std::move(q));
    }
    for (std::uint16_t i = 0; i < ancount; ++i) {
        WireRecord rr;
        rr.owner = r.name();
        rr.type = static_cast<RecordType>(r.u16());
        r.u16();
        rr.ttl = r.u32();
        auto rdata = r.take(r.u16());
        rr.rdata.assign(rdata.begin(), rdata.end());
        msg.answers.push_back(std::move(rr));
    }
    return msg;
}

} // namespace metapolicy::dns
