#include "metapolicy/publisher.hpp"

#include "metapolicy/canonical.hpp"
#include "metapolicy/errors.hpp"
#include "metapolicy/trust.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>

namespace metapolicy::publisher {

namespace {

std::string_view trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(std::string_view s)
{
    std::vector<std::string> out;
    while (!s.empty()) {
        auto comma = s.find(',');
        auto item = trim(s.substr(0, comma));
        if (!item.empty())
            out.emplace_back(item);
        if (comma == std::string_view::npos)
            break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& what)
{
    throw ConfigError(fmt::format("config line {}: {}", line, what));
}

std::uint32_t parse_u32(std::size_t line, std::string_view v)
{
    std::uint32_t out = 0;
    auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || end != v.data() + v.size())
        fail(line, "'" + std::string(v) + "' is not a number");
    return out;
}

std::string strip_comment(std::string_view line)
{
    // Only a `#` at line start or after whitespace opens a comment, so
    // specifications may still contain `#`.
    for (std::size_t i = 0; i < line.size(); ++i)
        if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t'))
            return std::string(line.substr(0, i));
    return std::string(line);
}

} // namespace

PublisherConfig parse_config(std::string_view text)
{
    PublisherConfig cfg;
    bool have_domain = false, have_from = false, have_to = false;
    PolicyEntry* current = nullptr;
    std::vector<bool> policy_has_id, policy_has_spec;

    std::size_t lineno = 0;
    while (!text.empty()) {
        ++lineno;
        auto eol = text.find('\n');
        auto raw = strip_comment(text.substr(0, eol));
        text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
        auto line = trim(raw);
        if (line.empty())
            continue;

        if (line == "[policy]") {
            cfg.policies.emplace_back();
            current = &cfg.policies.back();
            current->fail.mode = FailMode::hard;
            policy_has_id.push_back(false);
            policy_has_spec.push_back(false);
            continue;
        }
        if (line.front() == '[')
            fail(lineno, "unknown section " + std::string(line));

        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            fail(lineno, "expected key = value");
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));

        if (!current) {
            if (key == "domain") {
                auto d = DomainName::try_parse(value);
                if (!d)
                    fail(lineno, "bad domain '" + std::string(value) + "'");
                cfg.domain = *d;
                have_domain = true;
            } else if (key == "version") {
                cfg.version = parse_u32(lineno, value);
            } else if (key == "valid_from" || key == "valid_to") {
                auto date = parse_date(value);
                if (!date)
                    fail(lineno, "bad date '" + std::string(value) + "' (mm/dd/yyyy)");
                if (key == "valid_from") {
                    cfg.validity.valid_from = *date;
                    have_from = true;
                } else {
                    cfg.validity.valid_to = *date;
                    have_to = true;
                }
            } else if (key == "subdomains") {
                for (const auto& s : split_list(value)) {
                    try {
                        cfg.subdomains.push_back(SubdomainPattern::parse(s));
                    } catch (const InvalidName& e) {
                        fail(lineno, e.what());
                    }
                }
            } else {
                fail(lineno, "unknown key '" + std::string(key) + "'");
            }
            continue;
        }

        auto idx = cfg.policies.size() - 1;
        if (key == "id") {
            current->id = parse_u32(lineno, value);
            policy_has_id[idx] = true;
        } else if (key == "specification") {
            current->specification = std::string(value);
            policy_has_spec[idx] = true;
        } else if (key == "fail") {
            auto mode = parse_fail_mode(value);
            if (!mode)
                fail(lineno, "fail must be hard, soft or ignore");
            current->fail.mode = *mode;
        } else if (key == "report") {
            for (auto& a : split_list(value))
                current->fail.report_addresses.push_back(std::move(a));
        } else {
            fail(lineno, "unknown policy key '" + std::string(key) + "'");
        }
    }

    if (!have_domain)
        throw ConfigError("config: domain is required");
    if (!have_from || !have_to)
        throw ConfigError("config: valid_from and valid_to are required");
    for (std::size_t i = 0; i < cfg.policies.size(); ++i) {
        if (!policy_has_id[i])
            throw ConfigError(fmt::format("config: policy block {} has no id", i + 1));
        if (!policy_has_spec[i])
            throw ConfigError(fmt::format("config: policy block {} has no specification", i + 1));
    }
    return cfg;
}

std::string render_config(const Draft& draft)
{
    std::string out;
    out += "domain = " + draft.header.domain.str() + "\n";
    out += fmt::format("version = {}\n", draft.header.version);
    out += "valid_from = " + format_date(draft.header.validity.valid_from) + "\n";
    out += "valid_to = " + format_date(draft.header.validity.valid_to) + "\n";
    if (!draft.header.subdomains.empty()) {
        std::string subs;
        for (const auto& s : draft.header.subdomains)
            subs += (subs.empty() ? "" : ", ") + s.str();
        out += "subdomains = " + subs + "\n";
    }
    for (const auto& p : draft.policies) {
        out += fmt::format("\n[policy]\nid = {}\nspecification = {}\nfail = {}\n", p.id, p.specification,
                           to_string(p.fail.mode));
        for (const auto& a : p.fail.report_addresses)
            out += "report = " + a + "\n";
    }
    return out;
}

namespace {

void check_draft(const Draft& d)
{
    auto violations = validate_draft(d);
    if (violations.empty())
        return;
    std::string msg = "invalid metapolicy configuration:";
    for (const auto& v : violations)
        msg += "\n  " + v.str();
    throw ConfigError(msg);
}

} // namespace

Draft build(const PublisherConfig& config, const Metapolicy* previous)
{
    Draft d;
    d.header.domain = config.domain;
    d.header.validity = config.validity;
    d.header.subdomains = config.subdomains;
    d.header.parts = 1;
    d.policies = config.policies;

    if (previous) {
        if (previous->header.domain != config.domain)
            throw ConfigError("previous metapolicy is for " + previous->header.domain.str());
        if (config.version && *config.version <= previous->header.version)
            throw MonotonicityError(fmt::format("version {} does not exceed published version {}", *config.version,
                                                previous->header.version));
        d.header.version = config.version.value_or(previous->header.version + 1);
    } else {
        d.header.version = config.version.value_or(1);
    }
    check_draft(d);
    return d;
}

std::size_t signature_length(const PrivateKey& key)
{
    if (key.algorithm() == SignatureAlgorithm::rsa_pkcs1_sha256)
        return static_cast<std::size_t>(EVP_PKEY_get_size(key.native()));
    return 64;
}

FinalizeResult finalize(Draft draft, const PrivateKey& key, const CertificateChain& chain)
{
    check_draft(draft);

    // Settle Parts on a stand-in with a signature of the final length; the
    // real signature has the same length, so one signing normally suffices.
    Metapolicy probe{draft.header, draft.policies, {key.algorithm(), Bytes(signature_length(key), 0)}, chain};
    for (int i = 0; i < max_fixpoint_iterations; ++i) {
        auto n = codec::parts_needed(canonical_serialize(probe).size());
        if (n == probe.header.parts)
            break;
        probe.header.parts = n;
    }
    draft.header.parts = probe.header.parts;

    for (int iteration = 1; iteration <= max_fixpoint_iterations; ++iteration) {
        auto m = trust::sign(draft, key, chain);
        auto text = canonical_serialize(m);
        auto n = codec::parts_needed(text.size());
        if (n == m.header.parts)
            return {m, codec::encapsulate_bytes(m.header.domain, text, n), iteration};
        draft.header.parts = n;
    }
    throw Error(fmt::format("Parts did not settle after {} signatures", max_fixpoint_iterations));
}

Draft bump_version(const Metapolicy& previous, const Changes& changes)
{
    Draft d = previous.draft();
    auto next = previous.header.version + 1;
    if (changes.version) {
        if (*changes.version <= previous.header.version)
            throw MonotonicityError(fmt::format("version {} does not exceed published version {}", *changes.version,
                                                previous.header.version));
        next = *changes.version;
    }
    d.header.version = next;
    d.header.parts = 1;
    if (changes.validity)
        d.header.validity = *changes.validity;
    if (changes.subdomains)
        d.header.subdomains = *changes.subdomains;
    for (auto id : changes.remove_policies)
        std::erase_if(d.policies, [id](const PolicyEntry& p) { return p.id == id; });
    for (const auto& p : changes.upsert_policies) {
        auto it = std::find_if(d.policies.begin(), d.policies.end(), [&](const PolicyEntry& q) { return q.id == p.id; });
        if (it != d.policies.end())
            *it = p;
        else
            d.policies.push_back(p);
    }
    check_draft(d);
    return d;
}

std::string emit_zone_fragment(const codec::TxtRecordSet& records, std::uint32_t ttl)
{
    return codec::to_master_file(records, ttl);
}

dns::ZoneRecord dnskey_record(const DomainName& domain, const PublicKey& key, std::uint32_t ttl)
{
    return {domain, ttl, dns::RecordType::DNSKEY, dns::encode_dnskey(key.to_dnskey())};
}

} // namespace metapolicy::publisher
