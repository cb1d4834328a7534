#include "metapolicy/canonical.hpp"

#include "metapolicy/crypto.hpp"
#include "metapolicy/encoding.hpp"
#include "metapolicy/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <set>

namespace metapolicy {

namespace {

constexpr std::string_view utc_suffix = " UTC";

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

bool has_control_chars(std::string_view s) noexcept
{
    return std::any_of(s.begin(), s.end(), [](char c) {
        auto u = static_cast<unsigned char>(c);
        return u < 0x20 || u == 0x7f;
    });
}

bool is_space(char c) noexcept
{
    return c == ' ' || c == '\t';
}

std::string check_report_address(std::string_view addr)
{
    auto at = addr.find('@');
    if (at == std::string_view::npos || addr.find('@', at + 1) != std::string_view::npos)
        return "must contain exactly one '@'";
    if (at == 0 || at + 1 == addr.size())
        return "both sides of '@' must be non-empty";
    if (std::any_of(addr.begin(), addr.end(), [](char c) { return is_space(c) || c == ','; }) ||
        has_control_chars(addr))
        return "must not contain whitespace, commas or control characters";
    return {};
}

void validate_header(const Header& h, std::vector<Violation>& out)
{
    if (h.domain.empty())
        out.push_back({"Header.Domain", "must be present"});
    else if (!h.domain.is_hostname())
        out.push_back({"Header.Domain", "must be a host name (LDH labels)"});
    if (h.version < 1)
        out.push_back({"Header.Version", "must be at least 1"});
    if (h.parts < 1)
        out.push_back({"Header.Parts", "must be at least 1"});

    const auto& v = h.validity;
    auto year_ok = [](std::chrono::year_month_day d) {
        return d.ok() && static_cast<int>(d.year()) >= 1 && static_cast<int>(d.year()) <= 9999;
    };
    if (!year_ok(v.valid_from))
        out.push_back({"Header.Valid From", "must be a calendar date in years 0001-9999"});
    if (!year_ok(v.valid_to))
        out.push_back({"Header.Valid To", "must be a calendar date in years 0001-9999"});
    if (year_ok(v.valid_from) && year_ok(v.valid_to) &&
        std::chrono::sys_days(v.valid_from) > std::chrono::sys_days(v.valid_to))
        out.push_back({"Header.ValidityWindow", "Valid From must not be later than Valid To"});

    for (const auto& sub : h.subdomains) {
        if (!sub.base.is_hostname()) {
            out.push_back({"Header.Subdomains", "'" + sub.str() + "' is not a host name"});
            continue;
        }
        bool inside = sub.wildcard ? (sub.base == h.domain || sub.base.is_subdomain_of(h.domain))
                                   : sub.base.is_subdomain_of(h.domain);
        if (!h.domain.empty() && !inside)
            out.push_back({"Header.Subdomains", "'" + sub.str() + "' is not a descendant of " + h.domain.str()});
    }
}

void validate_policies(const std::vector<PolicyEntry>& policies, std::vector<Violation>& out)
{
    if (policies.empty())
        out.push_back({"Policies", "must contain at least one policy"});
    std::set<std::uint32_t> ids;
    for (const auto& p : policies) {
        std::string where = "Policies[" + std::to_string(p.id) + "]";
        if (p.id < 1)
            out.push_back({where + ".Id", "must be a positive RFC number"});
        if (!ids.insert(p.id).second)
            out.push_back({where + ".Id", "duplicate policy id"});
        const auto& spec = p.specification;
        if (spec.empty())
            out.push_back({where + ".Specification", "must be non-empty"});
        else if (has_control_chars(spec))
            out.push_back({where + ".Specification", "must be a single line without control characters"});
        else if (is_space(spec.front()) || is_space(spec.back()))
            out.push_back({where + ".Specification", "must not have leading or trailing whitespace"});
        for (const auto& addr : p.fail.report_addresses) {
            if (auto reason = check_report_address(addr); !reason.empty())
                out.push_back({where + ".Fail", "report address '" + addr + "' " + reason});
        }
    }
}

bool signature_length_ok(SignatureAlgorithm alg, std::size_t n) noexcept
{
    switch (alg) {
    case SignatureAlgorithm::ed25519:
    case SignatureAlgorithm::ecdsa_p256_sha256: return n == 64;
    case SignatureAlgorithm::rsa_pkcs1_sha256: return n >= 128 && n <= 1024;
    }
    return false;
}

void validate_chain(const CertificateChain& chain, ValidationScope scope, std::vector<Violation>& out)
{
    for (std::size_t i = 0; i < chain.certificates.size(); ++i) {
        if (chain.certificates[i].empty())
            out.push_back({"Certificate[" + std::to_string(i) + "]", "must not be empty"});
    }
    if (scope == ValidationScope::syntactic || !out.empty())
        return;

    std::vector<Certificate> certs;
    for (std::size_t i = 0; i < chain.certificates.size(); ++i) {
        try {
            certs.push_back(Certificate::from_der(chain.certificates[i]));
        } catch (const CryptoError&) {
            out.push_back({"Certificate[" + std::to_string(i) + "]", "is not a DER X.509 certificate"});
            return;
        }
    }
    for (std::size_t i = 0; i + 1 < certs.size(); ++i) {
        if (!certs[i].issued_by_name(certs[i + 1]))
            out.push_back({"Certificate[" + std::to_string(i) + "]",
                           "issuer name does not match the subject of the next certificate"});
    }
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

void put(std::string& out, std::string_view indent, std::string_view key, std::string_view value)
{
    out += indent;
    out += key;
    out += ':';
    if (!value.empty()) {
        out += ' ';
        out += value;
    }
    out += '\n';
}

template <typename Range, typename Fn>
std::string join(const Range& items, Fn&& fn)
{
    std::string out;
    for (const auto& item : items) {
        if (!out.empty())
            out += ", ";
        out += fn(item);
    }
    return out;
}

std::string render_draft(const Draft& d)
{
    const auto& h = d.header;
    std::string out;
    put(out, "", "Header", "");
    put(out, " ", "Domain", h.domain.str());
    put(out, " ", "Version", std::to_string(h.version));
    put(out, " ", "Valid From", format_date(h.validity.valid_from) + std::string(utc_suffix));
    put(out, " ", "Valid To", format_date(h.validity.valid_to) + std::string(utc_suffix));
    put(out, " ", "Parts", std::to_string(h.parts));
    put(out, " ", "Subdomains", join(h.subdomains, [](const SubdomainPattern& s) { return s.str(); }));
    out += '\n';
    put(out, "", "Policies", "");
    for (std::size_t i = 0; i < d.policies.size(); ++i) {
        const auto& p = d.policies[i];
        if (i > 0)
            out += '\n';
        put(out, " ", "Id", std::to_string(p.id));
        put(out, " ", "Specification", p.specification);
        std::string fail(to_string(p.fail.mode));
        for (const auto& addr : p.fail.report_addresses)
            fail += ", " + addr;
        put(out, " ", "Fail", fail);
    }
    return out;
}

[[noreturn]] void throw_structure(const std::vector<Violation>& violations)
{
    throw StructureError("structurally invalid metapolicy: " + violations.front().str());
}

// ---------------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------------

constexpr std::array<std::string_view, 4> section_names{"Header", "Policies", "Signature", "Certificate"};
constexpr std::array<std::string_view, 6> header_fields{"Domain", "Version", "Valid From", "Valid To", "Parts",
                                                        "Subdomains"};
constexpr std::array<std::string_view, 3> policy_fields{"Id", "Specification", "Fail"};

bool is_section(std::string_view key) noexcept
{
    return std::find(section_names.begin(), section_names.end(), key) != section_names.end();
}

bool is_field(std::string_view key) noexcept
{
    return std::find(header_fields.begin(), header_fields.end(), key) != header_fields.end() ||
           std::find(policy_fields.begin(), policy_fields.end(), key) != policy_fields.end();
}

std::string_view trim(std::string_view s) noexcept
{
    while (!s.empty() && (is_space(s.front()) || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (is_space(s.back()) || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_list(std::string_view value)
{
    std::vector<std::string_view> items;
    if (value.empty())
        return items;
    std::size_t pos = 0;
    while (true) {
        auto comma = value.find(',', pos);
        items.push_back(trim(value.substr(pos, comma == std::string_view::npos ? comma : comma - pos)));
        if (comma == std::string_view::npos)
            break;
        pos = comma + 1;
    }
    return items;
}

struct Line
{
    std::size_t number = 0;
    std::string_view key;
    std::string_view value;
};

class Parser
{
public:
    // With `complete_lines_only`, a trailing fragment without '\n' is ignored
    // (used when reading a header out of a truncated first part).
    Parser(std::string_view text, bool complete_lines_only)
    {
        std::size_t number = 0;
        std::size_t pos = 0;
        while (pos < text.size()) {
            ++number;
            auto nl = text.find('\n', pos);
            if (nl == std::string_view::npos && complete_lines_only)
                break;
            auto raw = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
            pos = nl == std::string_view::npos ? text.size() : nl + 1;
            last_number_ = number;

            // Trailing whitespace is tolerated, and so is any indentation.
            while (!raw.empty() && (is_space(raw.back()) || raw.back() == '\r'))
                raw.remove_suffix(1);
            while (!raw.empty() && is_space(raw.front()))
                raw.remove_prefix(1);
            if (raw.empty())
                continue;
            auto colon = raw.find(':');
            if (colon == std::string_view::npos)
                throw ParseError(number, "expected 'Key: value', got '" + std::string(raw) + "'");
            Line line{number, raw.substr(0, colon), raw.substr(colon + 1)};
            if (!line.value.empty() && line.value.front() == ' ')
                line.value.remove_prefix(1);
            lines_.push_back(line);
        }
    }

    bool at_end() const noexcept { return pos_ >= lines_.size(); }
    const Line& peek() const { return lines_[pos_]; }

    const Line& section(std::string_view name)
    {
        if (at_end())
            throw ParseError(last_number_ + 1, "missing section '" + std::string(name) + "'");
        const Line& line = lines_[pos_];
        if (!is_section(line.key)) {
            if (is_field(line.key))
                throw ParseError(line.number, "unexpected field '" + std::string(line.key) + "', expected section '" +
                                                  std::string(name) + "'");
            throw ParseError(line.number, "unknown section '" + std::string(line.key) + "'");
        }
        if (line.key != name) {
            if (sections_seen_.count(line.key))
                throw ParseError(line.number, "duplicate section '" + std::string(line.key) + "'");
            throw ParseError(line.number, "section '" + std::string(line.key) + "' out of order, expected '" +
                                              std::string(name) + "'");
        }
        sections_seen_.insert(line.key);
        ++pos_;
        return line;
    }

    const Line& field(std::string_view name, std::string_view in_section, std::set<std::string_view>& seen)
    {
        auto missing = [&](std::size_t number) {
            return ParseError(number, "missing field '" + std::string(name) + "' in " + std::string(in_section));
        };
        if (at_end())
            throw missing(last_number_ + 1);
        const Line& line = lines_[pos_];
        if (is_section(line.key))
            throw missing(line.number);
        if (!is_field(line.key))
            throw ParseError(line.number, "unknown field '" + std::string(line.key) + "'");
        if (seen.count(line.key))
            throw ParseError(line.number, "duplicate field '" + std::string(line.key) + "'");
        if (line.key != name)
            throw ParseError(line.number, "field '" + std::string(line.key) + "' out of order, expected '" +
                                              std::string(name) + "'");
        seen.insert(line.key);
        ++pos_;
        return line;
    }

    void expect_end(std::string_view after)
    {
        if (!at_end())
            throw ParseError(peek().number, "unexpected '" + std::string(peek().key) + "' after " + std::string(after));
    }

    std::size_t last_number() const noexcept { return last_number_; }

private:
    std::vector<Line> lines_;
    std::size_t pos_ = 0;
    std::size_t last_number_ = 0;
    std::set<std::string_view> sections_seen_;
};

std::uint32_t parse_positive(const Line& line, std::string_view what)
{
    auto v = line.value;
    std::uint32_t out = 0;
    auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc{} || end != v.data() + v.size())
        throw ParseError(line.number, "non-integer " + std::string(what) + " '" + std::string(v) + "'");
    if (out < 1)
        throw ParseError(line.number, std::string(what) + " must be at least 1");
    return out;
}

std::chrono::year_month_day parse_utc_date(const Line& line)
{
    auto v = line.value;
    if (!v.ends_with(utc_suffix))
        throw ParseError(line.number, "bad date '" + std::string(v) + "': expected mm/dd/yyyy UTC");
    auto date = parse_date(v.substr(0, v.size() - utc_suffix.size()));
    if (!date)
        throw ParseError(line.number, "bad date '" + std::string(v) + "'");
    return *date;
}

void no_inline_value(const Line& line)
{
    if (!line.value.empty())
        throw ParseError(line.number, "section '" + std::string(line.key) + "' takes no inline value");
}

HeaderPrefix parse_prefix_fields(Parser& p, std::set<std::string_view>& seen)
{
    no_inline_value(p.section("Header"));
    HeaderPrefix out;
    const auto& domain = p.field("Domain", "Header", seen);
    try {
        out.domain = DomainName::parse(domain.value);
    } catch (const InvalidName& e) {
        throw ParseError(domain.number, std::string("bad domain: ") + e.what());
    }
    out.version = parse_positive(p.field("Version", "Header", seen), "version");
    out.validity.valid_from = parse_utc_date(p.field("Valid From", "Header", seen));
    out.validity.valid_to = parse_utc_date(p.field("Valid To", "Header", seen));
    out.parts = parse_positive(p.field("Parts", "Header", seen), "parts");
    return out;
}

Draft parse_draft_sections(Parser& p)
{
    Draft d;
    std::set<std::string_view> seen;
    auto prefix = parse_prefix_fields(p, seen);
    d.header.domain = prefix.domain;
    d.header.version = prefix.version;
    d.header.validity = prefix.validity;
    d.header.parts = prefix.parts;

    const auto& subs = p.field("Subdomains", "Header", seen);
    for (auto item : split_list(subs.value)) {
        try {
            d.header.subdomains.push_back(SubdomainPattern::parse(item));
        } catch (const InvalidName& e) {
            throw ParseError(subs.number, "bad subdomain '" + std::string(item) + "': " + e.what());
        }
    }

    no_inline_value(p.section("Policies"));
    std::set<std::uint32_t> ids;
    while (!p.at_end() && !is_section(p.peek().key)) {
        std::set<std::string_view> policy_seen;
        PolicyEntry entry;
        const auto& id = p.field("Id", "Policies", policy_seen);
        entry.id = parse_positive(id, "policy id");
        if (!ids.insert(entry.id).second)
            throw ParseError(id.number, "duplicate policy id " + std::to_string(entry.id));
        entry.specification = std::string(p.field("Specification", "Policies", policy_seen).value);

        const auto& fail = p.field("Fail", "Policies", policy_seen);
        auto items = split_list(fail.value);
        if (items.empty())
            throw ParseError(fail.number, "missing fail mode");
        auto mode = parse_fail_mode(items.front());
        if (!mode)
            throw ParseError(fail.number, "bad fail mode '" + std::string(items.front()) + "'");
        entry.fail.mode = *mode;
        for (std::size_t i = 1; i < items.size(); ++i) {
            if (items[i].empty())
                throw ParseError(fail.number, "empty report address");
            entry.fail.report_addresses.emplace_back(items[i]);
        }
        d.policies.push_back(std::move(entry));
    }
    if (d.policies.empty())
        throw ParseError(p.at_end() ? p.last_number() + 1 : p.peek().number, "Policies section has no entries");
    return d;
}

} // namespace

std::vector<Violation> validate_draft(const Draft& d)
{
    std::vector<Violation> out;
    validate_header(d.header, out);
    validate_policies(d.policies, out);
    return out;
}

std::vector<Violation> validate_structure(const Metapolicy& m, ValidationScope scope)
{
    std::vector<Violation> out;
    validate_header(m.header, out);
    validate_policies(m.policies, out);
    if (m.signature.value.empty())
        out.push_back({"Signature", "value must be non-empty"});
    else if (!signature_length_ok(m.signature.algorithm, m.signature.value.size()))
        out.push_back({"Signature", "length " + std::to_string(m.signature.value.size()) + " is inconsistent with " +
                                        std::string(to_string(m.signature.algorithm))});
    validate_chain(m.chain, scope, out);
    return out;
}

std::string signing_input(const Draft& d)
{
    if (auto v = validate_draft(d); !v.empty())
        throw_structure(v);
    return render_draft(d);
}

std::string signing_input(const Metapolicy& m)
{
    return signing_input(m.draft());
}

std::string canonical_serialize(const Metapolicy& m)
{
    if (auto v = validate_structure(m, ValidationScope::syntactic); !v.empty())
        throw_structure(v);
    std::string out = render_draft(m.draft());
    out += '\n';
    put(out, "", "Signature", std::string(to_string(m.signature.algorithm)) + ":" + base64_encode(m.signature.value));
    out += '\n';
    put(out, "", "Certificate", join(m.chain.certificates, [](const Bytes& der) { return base64_encode(der); }));
    return out;
}

Draft parse_draft(std::string_view text)
{
    Parser p(text, false);
    Draft d = parse_draft_sections(p);
    p.expect_end("the Policies section");
    if (auto v = validate_draft(d); !v.empty())
        throw ParseError(0, v.front().str());
    return d;
}

Metapolicy parse(std::string_view text)
{
    Parser p(text, false);
    Draft d = parse_draft_sections(p);
    Metapolicy m;
    m.header = std::move(d.header);
    m.policies = std::move(d.policies);

    const auto& sig = p.section("Signature");
    auto colon = sig.value.find(':');
    if (colon == std::string_view::npos)
        throw ParseError(sig.number, "signature must be '<algorithm>:<base64>'");
    auto alg = parse_signature_algorithm(sig.value.substr(0, colon));
    if (!alg)
        throw ParseError(sig.number, "unknown signature algorithm '" + std::string(sig.value.substr(0, colon)) + "'");
    auto value = base64_decode(sig.value.substr(colon + 1));
    if (!value)
        throw ParseError(sig.number, "signature value is not valid base64");
    m.signature = SignatureBlock{*alg, std::move(*value)};

    const auto& cert = p.section("Certificate");
    for (auto item : split_list(cert.value)) {
        auto der = base64_decode(item);
        if (!der || der->empty())
            throw ParseError(cert.number, "certificate is not valid base64");
        m.chain.certificates.push_back(std::move(*der));
    }
    p.expect_end("the Certificate section");

    if (auto v = validate_structure(m, ValidationScope::syntactic); !v.empty())
        throw ParseError(0, v.front().str());
    return m;
}

HeaderPrefix parse_header_prefix(std::string_view text)
{
    Parser p(text, true);
    std::set<std::string_view> seen;
    return parse_prefix_fields(p, seen);
}

} // namespace metapolicy
