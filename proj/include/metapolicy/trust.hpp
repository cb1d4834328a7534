#pragma once

#include "metapolicy/crypto.hpp"
#include "metapolicy/model.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace metapolicy {
class ResolverPort;
}

namespace metapolicy::trust {

using Clock = std::function<std::chrono::sys_seconds()>;

Clock system_clock();
Clock fixed_clock(std::chrono::sys_seconds t);
Clock fixed_clock(std::chrono::year_month_day day);

struct TrustConfig
{
    std::vector<Certificate> root_store;
    std::map<DomainName, std::vector<DnskeyRdata>> dnssec_anchors;
    Clock clock = system_clock();

    std::chrono::sys_seconds now() const { return clock(); }
    std::chrono::sys_days today() const { return std::chrono::floor<std::chrono::days>(clock()); }
};

enum class VerificationStatus {
    valid,
    invalid_signature,
    invalid_chain,
    untrusted_root,
    expired_certificate,
    domain_mismatch,
    no_key_material,
    // The metapolicy's own Valid From / Valid To window excludes the clock.
    outside_validity_window,
};

std::string_view to_string(VerificationStatus status) noexcept;

struct VerificationResult
{
    VerificationStatus status = VerificationStatus::valid;
    std::string details;

    bool valid() const noexcept { return status == VerificationStatus::valid; }
};

// Signs header + policies. A non-empty chain must start with the leaf whose
// key is `key` and whose names cover the domain; an empty chain means DNSSEC
// mode.
Metapolicy sign(const Draft& draft, const PrivateKey& key, CertificateChain chain = {});

// Never throws on bad input; every failure is reported through the status.
// `resolver` is only consulted for DNSSEC-signed metapolicies (empty chain),
// to fetch the domain's DNSKEY set.
VerificationResult verify(const Metapolicy& m, const TrustConfig& cfg, ResolverPort* resolver = nullptr);

// Issuer/subject linkage, signatures, CA flags, anchoring in the root store
// and validity periods at cfg.clock. The chain may optionally end with the
// self-signed root itself, provided that root is in the store.
VerificationResult validate_chain(const CertificateChain& chain, const TrustConfig& cfg);

// X.509 host name matching with a single-label left-most wildcard.
bool dns_name_matches(std::string_view pattern, const DomainName& name);
bool certificate_covers(const Certificate& cert, const DomainName& name);

enum class RevocationStatus { not_checked };
RevocationStatus check_revocation(const CertificateChain& chain);

} // namespace metapolicy::trust
