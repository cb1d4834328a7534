#pragma once

#include "metapolicy/canonical.hpp"
#include "metapolicy/crypto.hpp"
#include "metapolicy/fixtures/generators.hpp"
#include "metapolicy/fixtures/pki.hpp"
#include "metapolicy/publisher.hpp"
#include "metapolicy/testnet.hpp"
#include "metapolicy/trust.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace support {

namespace mp = metapolicy;
namespace chr = std::chrono;

inline std::filesystem::path data_dir()
{
    return METAPOLICY_TEST_DATA;
}

inline std::string read_data(const std::string& relative)
{
    return mp::read_file(data_dir() / relative);
}

inline chr::year_month_day example_clock_day()
{
    return chr::year{2017} / 6 / 1;
}

inline mp::trust::TrustConfig example_trust()
{
    mp::trust::TrustConfig cfg;
    cfg.root_store = mp::load_root_store(data_dir() / "example" / "roots");
    cfg.clock = mp::trust::fixed_clock(example_clock_day());
    return cfg;
}

// ECDSA throughout: fast to generate. One PKI per domain per process.
inline const mp::fixtures::Pki& fast_pki(const std::string& domain, const std::string& label = "Test")
{
    static std::map<std::string, mp::fixtures::Pki> cache;
    auto key = domain + "|" + label;
    auto it = cache.find(key);
    if (it == cache.end()) {
        mp::fixtures::PkiOptions opts;
        opts.ca_algorithm = mp::SignatureAlgorithm::ecdsa_p256_sha256;
        opts.leaf_algorithm = mp::SignatureAlgorithm::ecdsa_p256_sha256;
        opts.label = label;
        it = cache.emplace(key, mp::fixtures::make_pki(mp::DomainName::parse(domain), opts)).first;
    }
    return it->second;
}

inline mp::trust::TrustConfig trust_for(const mp::fixtures::Pki& pki, chr::year_month_day day = chr::year{2024} / 6 / 1)
{
    mp::trust::TrustConfig cfg;
    cfg.root_store = pki.root_store();
    cfg.clock = mp::trust::fixed_clock(day);
    return cfg;
}

// Draft for `domain` valid through 2024, padded with a filler policy until
// the signed text needs `parts` records.
inline mp::Draft sized_draft(const mp::DomainName& domain, std::uint32_t version, std::size_t filler_bytes = 0)
{
    mp::Draft d;
    d.header.domain = domain;
    d.header.version = version;
    d.header.validity = {chr::year{2020} / 1 / 1, chr::year{2025} / 12 / 31};
    d.header.subdomains = {mp::SubdomainPattern::parse("www." + domain.str())};
    d.policies.push_back({7208, "v=spf1 ip4:192.0.2.0/24 -all", {mp::FailMode::hard, {"report@" + domain.str()}}});
    if (filler_bytes)
        d.policies.push_back({6376, "v=DKIM1; k=rsa; p=" + std::string(filler_bytes, 'A'), {mp::FailMode::soft, {}}});
    return d;
}

} // namespace support
