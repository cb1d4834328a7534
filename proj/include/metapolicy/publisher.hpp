#pragma once

#include "metapolicy/codec.hpp"
#include "metapolicy/crypto.hpp"
#include "metapolicy/zone_file.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Operator-side pipeline: config -> draft -> signed metapolicy -> zone lines.
//
// Config documents are line oriented. `#` starts a comment. Top-level keys
// come first, then one `[policy]` block per policy entry:
//
//     domain = a.com
//     version = 1                     # optional
//     valid_from = 12/09/2016
//     valid_to = 12/09/2018
//     subdomains = example.a.com, verbal.a.com
//
//     [policy]
//     id = 7288
//     specification = v=spf1 a include:aspmx.googlemail.com ~all
//     fail = hard
//     report = report@a.com           # comma separated, may repeat
namespace metapolicy::publisher {

struct PublisherConfig
{
    DomainName domain;
    std::optional<std::uint32_t> version;
    ValidityWindow validity;
    std::vector<SubdomainPattern> subdomains;
    std::vector<PolicyEntry> policies;
};

PublisherConfig parse_config(std::string_view text);
std::string render_config(const Draft& draft);

// Parts starts at 1. Without an explicit version: previous + 1, or 1.
Draft build(const PublisherConfig& config, const Metapolicy* previous = nullptr);

struct FinalizeResult
{
    Metapolicy metapolicy;
    codec::TxtRecordSet records;
    // Signatures computed before Parts settled.
    int iterations = 0;
};

inline constexpr int max_fixpoint_iterations = 4;

// Signs with Parts equal to the number of records the signed text needs.
FinalizeResult finalize(Draft draft, const PrivateKey& key, const CertificateChain& chain = {});

struct Changes
{
    std::optional<std::uint32_t> version;
    std::optional<ValidityWindow> validity;
    std::optional<std::vector<SubdomainPattern>> subdomains;
    // Replaces an entry with the same id, otherwise appends.
    std::vector<PolicyEntry> upsert_policies;
    std::vector<std::uint32_t> remove_policies;
};

// previous.version + 1 unless `changes.version` asks for more. Asking for
// previous.version or less throws MonotonicityError. The signature is
// dropped; finalize with the new key and chain for a certificate rollover.
Draft bump_version(const Metapolicy& previous, const Changes& changes = {});

std::string emit_zone_fragment(const codec::TxtRecordSet& records, std::uint32_t ttl = codec::default_ttl);

// The DNSKEY record to publish when signing in DNSSEC mode.
dns::ZoneRecord dnskey_record(const DomainName& domain, const PublicKey& key, std::uint32_t ttl = codec::default_ttl);

// Byte length of signatures made by `key`.
std::size_t signature_length(const PrivateKey& key);

} // namespace metapolicy::publisher
