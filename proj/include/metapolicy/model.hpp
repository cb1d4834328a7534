#pragma once

#include "metapolicy/domain_name.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace metapolicy {

using Bytes = std::vector<std::uint8_t>;

// Whole-day validity, inclusive at both ends, in UTC.
struct ValidityWindow
{
    std::chrono::year_month_day valid_from;
    std::chrono::year_month_day valid_to;

    bool contains(std::chrono::sys_days day) const noexcept;
    // True once `day` is past valid_to.
    bool expired_at(std::chrono::sys_days day) const noexcept;

    friend bool operator==(const ValidityWindow&, const ValidityWindow&) = default;
};

// mm/dd/yyyy, zero padded.
std::string format_date(std::chrono::year_month_day date);
// Accepts m/d/yyyy with or without zero padding; rejects impossible dates.
std::optional<std::chrono::year_month_day> parse_date(std::string_view text);

enum class FailMode { hard, soft, ignore };

std::string_view to_string(FailMode mode) noexcept;
std::optional<FailMode> parse_fail_mode(std::string_view token) noexcept;

struct FailDirective
{
    FailMode mode = FailMode::hard;
    std::vector<std::string> report_addresses;

    friend bool operator==(const FailDirective&, const FailDirective&) = default;
};

struct PolicyEntry
{
    // RFC number of the policy type (7208 for SPF, 6376 for DKIM, ...).
    std::uint32_t id = 0;
    std::string specification;
    FailDirective fail;

    friend bool operator==(const PolicyEntry&, const PolicyEntry&) = default;
};

struct Header
{
    DomainName domain;
    std::uint32_t version = 1;
    ValidityWindow validity;
    std::uint32_t parts = 1;
    std::vector<SubdomainPattern> subdomains;

    friend bool operator==(const Header&, const Header&) = default;
};

enum class SignatureAlgorithm { rsa_pkcs1_sha256, ecdsa_p256_sha256, ed25519 };

std::string_view to_string(SignatureAlgorithm alg) noexcept;
std::optional<SignatureAlgorithm> parse_signature_algorithm(std::string_view token) noexcept;

struct SignatureBlock
{
    SignatureAlgorithm algorithm = SignatureAlgorithm::ed25519;
    Bytes value;

    friend bool operator==(const SignatureBlock&, const SignatureBlock&) = default;
};

// DER certificates, leaf first, trust-anchor root excluded. Empty when the
// metapolicy is signed with the domain's DNSSEC key.
struct CertificateChain
{
    std::vector<Bytes> certificates;

    bool empty() const noexcept { return certificates.empty(); }

    friend bool operator==(const CertificateChain&, const CertificateChain&) = default;
};

// Header and Policies only: what gets signed.
struct Draft
{
    Header header;
    std::vector<PolicyEntry> policies;

    const PolicyEntry* find_policy(std::uint32_t id) const noexcept;

    friend bool operator==(const Draft&, const Draft&) = default;
};

struct Metapolicy
{
    Header header;
    std::vector<PolicyEntry> policies;
    SignatureBlock signature;
    CertificateChain chain;

    Draft draft() const { return Draft{header, policies}; }
    const PolicyEntry* find_policy(std::uint32_t id) const noexcept;

    friend bool operator==(const Metapolicy&, const Metapolicy&) = default;
};

} // namespace metapolicy
