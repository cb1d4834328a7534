#include "metapolicy/trust.hpp"

#include "metapolicy/canonical.hpp"
#include "metapolicy/encoding.hpp"
#include "metapolicy/errors.hpp"
#include "metapolicy/resolver.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace metapolicy::trust {

namespace {

VerificationResult fail(VerificationStatus status, std::string details)
{
    return VerificationResult{status, std::move(details)};
}

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c); });
    return out;
}

std::string iso_time(std::chrono::sys_seconds t)
{
    auto day = std::chrono::floor<std::chrono::days>(t);
    std::chrono::year_month_day ymd{day};
    std::chrono::hh_mm_ss hms{t - day};
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hms.hours().count(),
                       hms.minutes().count(), hms.seconds().count());
}

VerificationResult verify_with_chain(const Metapolicy& m, const TrustConfig& cfg, std::string_view input)
{
    auto chain = validate_chain(m.chain, cfg);
    if (!chain.valid())
        return chain;
    auto leaf = Certificate::from_der(m.chain.certificates.front());
    if (!certificate_covers(leaf, m.header.domain))
        return fail(VerificationStatus::domain_mismatch,
                    "leaf certificate " + leaf.subject_text() + " does not cover " + m.header.domain.str());
    auto key = leaf.public_key();
    if (key.algorithm() != m.signature.algorithm)
        return fail(VerificationStatus::invalid_signature,
                    fmt::format("signature algorithm {} does not match the leaf key ({})", to_string(m.signature.algorithm),
                                to_string(key.algorithm())));
    if (!key.verify(as_bytes(input), m.signature.value))
        return fail(VerificationStatus::invalid_signature, "signature does not verify with the leaf certificate key");
    return {};
}

VerificationResult verify_with_dnssec(const Metapolicy& m, const TrustConfig& cfg, ResolverPort* resolver,
                                      std::string_view input)
{
    auto anchors = cfg.dnssec_anchors.find(m.header.domain);
    if (anchors == cfg.dnssec_anchors.end() || anchors->second.empty())
        return fail(VerificationStatus::no_key_material, "no DNSSEC trust anchor configured for " + m.header.domain.str());
    if (!resolver)
        return fail(VerificationStatus::no_key_material, "no resolver available to fetch the DNSKEY set");

    std::vector<DnskeyRdata> published;
    try {
        published = resolver->query_dnskey(m.header.domain);
    } catch (const Error& e) {
        return fail(VerificationStatus::no_key_material, std::string("DNSKEY lookup failed: ") + e.what());
    }

    bool any_trusted = false;
    auto wanted = dnssec_algorithm_number(m.signature.algorithm);
    for (const auto& key : published) {
        bool anchored = std::any_of(anchors->second.begin(), anchors->second.end(), [&](const DnskeyRdata& a) {
            return a.algorithm == key.algorithm && a.public_key == key.public_key;
        });
        if (!anchored)
            continue;
        any_trusted = true;
        if (key.algorithm != wanted)
            continue;
        try {
            if (PublicKey::from_dnskey(key).verify(as_bytes(input), m.signature.value))
                return {};
        } catch (const CryptoError&) {
            continue;
        }
    }
    if (!any_trusted)
        return fail(VerificationStatus::no_key_material,
                    "no published DNSKEY of " + m.header.domain.str() + " matches a configured anchor");
    return fail(VerificationStatus::invalid_signature, "signature does not verify with any anchored DNSKEY");
}

} // namespace

Clock system_clock()
{
    return [] { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); };
}

Clock fixed_clock(std::chrono::sys_seconds t)
{
    return [t] { return t; };
}

Clock fixed_clock(std::chrono::year_month_day day)
{
    return fixed_clock(std::chrono::sys_seconds(std::chrono::sys_days(day)) + std::chrono::hours(12));
}

std::string_view to_string(VerificationStatus status) noexcept
{
    switch (status) {
    case VerificationStatus::valid: return "valid";
    case VerificationStatus::invalid_signature: return "invalid_signature";
    case VerificationStatus::invalid_chain: return "invalid_chain";
    case VerificationStatus::untrusted_root: return "untrusted_root";
    case VerificationStatus::expired_certificate: return "expired_certificate";
    case VerificationStatus::domain_mismatch: return "domain_mismatch";
    case VerificationStatus::no_key_material: return "no_key_material";
    case VerificationStatus::outside_validity_window: return "outside_validity_window";
    }
    return "invalid_signature";
}

Metapolicy sign(const Draft& draft, const PrivateKey& key, CertificateChain chain)
{
    if (!chain.empty()) {
        auto leaf = Certificate::from_der(chain.certificates.front());
        if (!(leaf.public_key() == key.public_key()))
            throw SignError(SignError::Kind::key_leaf_mismatch, "signing key does not match the leaf certificate");
        if (!certificate_covers(leaf, draft.header.domain))
            throw SignError(SignError::Kind::domain_not_covered,
                            "leaf certificate does not cover " + draft.header.domain.str());
    }
    auto input = signing_input(draft);
    Metapolicy m;
    m.header = draft.header;
    m.policies = draft.policies;
    m.signature = SignatureBlock{key.algorithm(), key.sign(as_bytes(input))};
    m.chain = std::move(chain);
    return m;
}

VerificationResult verify(const Metapolicy& m, const TrustConfig& cfg, ResolverPort* resolver)
{
    std::string input;
    try {
        if (auto v = validate_structure(m, ValidationScope::syntactic); !v.empty())
            return fail(VerificationStatus::invalid_signature, "structurally invalid: " + v.front().str());
        input = signing_input(m);
    } catch (const Error& e) {
        return fail(VerificationStatus::invalid_signature, e.what());
    }

    VerificationResult result;
    try {
        result = m.chain.empty() ? verify_with_dnssec(m, cfg, resolver, input) : verify_with_chain(m, cfg, input);
    } catch (const Error& e) {
        return fail(VerificationStatus::invalid_chain, e.what());
    }
    if (!result.valid())
        return result;

    if (!m.header.validity.contains(cfg.today()))
        return fail(VerificationStatus::outside_validity_window,
                    "metapolicy is valid from " + format_date(m.header.validity.valid_from) + " to " +
                        format_date(m.header.validity.valid_to) + ", clock is " + iso_time(cfg.now()));
    return {};
}

VerificationResult validate_chain(const CertificateChain& chain, const TrustConfig& cfg)
{
    if (chain.empty())
        return fail(VerificationStatus::invalid_chain, "empty certificate chain");

    std::vector<Certificate> certs;
    for (std::size_t i = 0; i < chain.certificates.size(); ++i) {
        try {
            certs.push_back(Certificate::from_der(chain.certificates[i]));
        } catch (const CryptoError& e) {
            return fail(VerificationStatus::invalid_chain, fmt::format("certificate {} is unreadable: {}", i, e.what()));
        }
    }

    for (std::size_t i = 0; i + 1 < certs.size(); ++i) {
        const auto& child = certs[i];
        const auto& issuer = certs[i + 1];
        if (!child.issued_by_name(issuer))
            return fail(VerificationStatus::invalid_chain,
                        fmt::format("certificate {} ({}) is not issued by certificate {} ({})", i, child.subject_text(),
                                    i + 1, issuer.subject_text()));
        if (!issuer.is_ca())
            return fail(VerificationStatus::invalid_chain,
                        fmt::format("certificate {} ({}) is not a CA", i + 1, issuer.subject_text()));
        if (!child.signature_verifies_with(issuer.public_key()))
            return fail(VerificationStatus::invalid_chain,
                        fmt::format("signature on certificate {} does not verify with certificate {}", i, i + 1));
    }

    // Anchor: the last certificate is either a trusted root itself or is
    // signed by one.
    const auto& last = certs.back();
    const Certificate* anchor = nullptr;
    for (const auto& root : cfg.root_store) {
        if (root == last) {
            anchor = &root;
            break;
        }
    }
    if (!anchor) {
        for (const auto& root : cfg.root_store) {
            if (last.issued_by_name(root) && last.signature_verifies_with(root.public_key())) {
                anchor = &root;
                break;
            }
        }
    }
    if (!anchor)
        return fail(VerificationStatus::untrusted_root, "chain does not end at a root in the trust store (last: " +
                                                            last.subject_text() + ")");

    auto now = cfg.now();
    certs.push_back(*anchor);
    for (const auto& c : certs) {
        if (!c.valid_at(now))
            return fail(VerificationStatus::expired_certificate,
                        c.subject_text() + " is valid from " + iso_time(c.not_before()) + " to " +
                            iso_time(c.not_after()) + ", clock is " + iso_time(now));
    }
    return {};
}

bool dns_name_matches(std::string_view pattern, const DomainName& name)
{
    std::string p = lower(pattern);
    if (p.ends_with('.'))
        p.pop_back();
    if (p.starts_with("*.")) {
        auto base = DomainName::try_parse(std::string_view(p).substr(2));
        // A wildcard directly under a single-label name (*.com) is never honoured.
        if (!base || base->labels().size() < 2)
            return false;
        return name.labels().size() == base->labels().size() + 1 && name.parent() == *base;
    }
    auto exact = DomainName::try_parse(p);
    return exact && *exact == name;
}

bool certificate_covers(const Certificate& cert, const DomainName& name)
{
    auto names = cert.dns_names();
    return std::any_of(names.begin(), names.end(), [&](const std::string& n) { return dns_name_matches(n, name); });
}

RevocationStatus check_revocation(const CertificateChain&)
{
    return RevocationStatus::not_checked;
}

} // namespace metapolicy::trust
