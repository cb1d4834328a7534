#pragma once

#include "metapolicy/model.hpp"
#include "metapolicy/zone_file.hpp"

#include <array>

#include <random>
#include <string>

namespace metapolicy::fixtures {

// Header and policies of the published example metapolicy for a.com.
Draft example_draft();

// Random printable single-line text with no leading/trailing blanks.
std::string random_specification(std::mt19937_64& rng, std::size_t length);

struct RandomDraftOptions
{
    std::size_t min_policies = 1;
    std::size_t max_policies = 4;
    std::size_t min_spec_length = 1;
    std::size_t max_spec_length = 120;
};

Draft random_draft(std::mt19937_64& rng, const RandomDraftOptions& opts = {});

// A structurally valid metapolicy of roughly `target_size` canonical bytes
// with random signature and certificate bytes (not cryptographically
// meaningful) and Header.parts consistent with its size.
Metapolicy random_metapolicy(std::mt19937_64& rng, std::size_t target_size);

// Re-derives Header.parts until it matches the serialized size. Signature
// bytes are left untouched, so only use on unsigned test values.
void fit_parts(Metapolicy& m);

// Example-shaped draft for `domain` whose policies follow the mix used by the
// overhead measurement: SPF, DKIM with a 2048-bit key, DMARC.
Draft typical_email_draft(const DomainName& domain, std::mt19937_64& rng);

struct ScanFixtureDomain
{
    DomainName domain;
    // SPF, DKIM, DMARC, DNSSEC, CAA, DANE.
    std::array<bool, 6> flags{};
};

struct ScanFixture
{
    std::vector<ScanFixtureDomain> domains;
    std::vector<dns::ZoneRecord> records;

    // Master-file text for `records`.
    std::string zone_text() const;
    // "rank,domain" lines.
    std::string domain_list() const;
};

// 100 domains whose per-policy counts echo the deployment survey shares
// (56 SPF, 47 DKIM, 10 DMARC, 3 DNSSEC, 1 CAA, 0 DANE), with look-alike
// records (non-SPF TXT, DKIM under an unprobed selector, non-DMARC TXT at
// _dmarc) mixed in. `flags` is what a correct scan reports.
ScanFixture scan_fixture(std::uint64_t seed = 2017);

} // namespace metapolicy::fixtures
