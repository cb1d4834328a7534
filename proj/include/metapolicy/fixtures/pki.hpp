#pragma once

#include "metapolicy/crypto.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <vector>

// Throwaway X.509 hierarchies for tests and benchmarks. Not meant for
// issuing real certificates.
namespace metapolicy::fixtures {

struct CertOptions
{
    std::string common_name;
    std::vector<std::string> dns_names;
    std::chrono::sys_seconds not_before;
    std::chrono::sys_seconds not_after;
    bool ca = false;
};

// `issuer` null means self-signed with `issuer_key`.
Certificate issue_certificate(const CertOptions& opts, const PublicKey& subject_key, const Certificate* issuer,
                              const PrivateKey& issuer_key);

struct Credential
{
    PrivateKey key;
    Certificate cert;
};

struct PkiOptions
{
    SignatureAlgorithm ca_algorithm = SignatureAlgorithm::ecdsa_p256_sha256;
    SignatureAlgorithm leaf_algorithm = SignatureAlgorithm::rsa_pkcs1_sha256;
    unsigned rsa_bits = 2048;
    std::chrono::sys_seconds not_before = std::chrono::sys_days(std::chrono::year{2015} / 1 / 1);
    std::chrono::sys_seconds not_after = std::chrono::sys_days(std::chrono::year{2035} / 1 / 1);
    // Overrides for the leaf only (expired-leaf fixtures).
    std::optional<std::chrono::sys_seconds> leaf_not_after;
    // Names on the leaf; defaults to the domain itself.
    std::vector<std::string> leaf_names;
    // Distinguishes subject names when several PKIs share a trust store.
    std::string label = "Fixture";
};

struct Pki
{
    Credential root;
    Credential intermediate;
    Credential leaf;

    // leaf, intermediate and (optionally) the root.
    CertificateChain chain(bool include_root = true) const;
    std::vector<Certificate> root_store() const { return {root.cert}; }
};

Pki make_pki(const DomainName& domain, const PkiOptions& opts = {});

} // namespace metapolicy::fixtures
