#pragma once

#include "metapolicy/model.hpp"

#include <chrono>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

typedef struct evp_pkey_st EVP_PKEY;
typedef struct x509_st X509;

namespace metapolicy {

namespace detail {
struct PkeyDeleter { void operator()(EVP_PKEY* p) const noexcept; };
struct X509Deleter { void operator()(X509* p) const noexcept; };
} // namespace detail

// DNSKEY RDATA fields (RFC 4034 section 2.1).
struct DnskeyRdata
{
    std::uint16_t flags = 257;
    std::uint8_t protocol = 3;
    std::uint8_t algorithm = 0;
    Bytes public_key;

    friend bool operator==(const DnskeyRdata&, const DnskeyRdata&) = default;
};

// DNSSEC algorithm numbers for the supported signature algorithms.
std::uint8_t dnssec_algorithm_number(SignatureAlgorithm alg) noexcept;

class PublicKey
{
public:
    static PublicKey from_spki_der(std::span<const std::uint8_t> der);
    static PublicKey from_pem(std::string_view pem);
    // Decodes the RFC 3110 / RFC 6605 / RFC 8080 key field of a DNSKEY.
    static PublicKey from_dnskey(const DnskeyRdata& rdata);

    SignatureAlgorithm algorithm() const noexcept { return algorithm_; }
    Bytes spki_der() const;
    DnskeyRdata to_dnskey(std::uint16_t flags = 257) const;

    // Signatures use the metapolicy wire shape: raw r||s for ECDSA.
    bool verify(std::span<const std::uint8_t> data, std::span<const std::uint8_t> signature) const;

    EVP_PKEY* native() const noexcept { return key_.get(); }

    friend bool operator==(const PublicKey& a, const PublicKey& b);

private:
    explicit PublicKey(std::shared_ptr<EVP_PKEY> key);

    std::shared_ptr<EVP_PKEY> key_;
    SignatureAlgorithm algorithm_;
};

class PrivateKey
{
public:
    static PrivateKey generate(SignatureAlgorithm alg, unsigned rsa_bits = 2048);
    static PrivateKey from_pem(std::string_view pem);
    static PrivateKey from_der(std::span<const std::uint8_t> der);
    static PrivateKey load(const std::filesystem::path& path);

    SignatureAlgorithm algorithm() const noexcept { return algorithm_; }
    PublicKey public_key() const;
    std::string to_pem() const;

    Bytes sign(std::span<const std::uint8_t> data) const;

    EVP_PKEY* native() const noexcept { return key_.get(); }

private:
    explicit PrivateKey(std::shared_ptr<EVP_PKEY> key);

    std::shared_ptr<EVP_PKEY> key_;
    SignatureAlgorithm algorithm_;
};

class Certificate
{
public:
    static Certificate from_der(std::span<const std::uint8_t> der);
    static Certificate from_pem(std::string_view pem);
    // Takes shared ownership of `cert` (the reference count is bumped).
    static Certificate wrap(X509* cert);

    Bytes der() const;
    std::string to_pem() const;
    std::string subject_text() const;

    std::chrono::sys_seconds not_before() const;
    std::chrono::sys_seconds not_after() const;
    bool valid_at(std::chrono::sys_seconds t) const;

    PublicKey public_key() const;
    bool is_ca() const;
    // DNS names the certificate asserts: subjectAltName dNSName entries, or
    // the subject CN when the certificate has no SAN extension.
    std::vector<std::string> dns_names() const;

    bool issued_by_name(const Certificate& issuer) const;
    bool signature_verifies_with(const PublicKey& issuer_key) const;
    bool same_subject(const Certificate& other) const;

    X509* native() const noexcept { return cert_.get(); }

    friend bool operator==(const Certificate& a, const Certificate& b) { return a.der() == b.der(); }

private:
    explicit Certificate(std::shared_ptr<X509> cert) : cert_(std::move(cert)) {}
    friend std::vector<Certificate> parse_pem_bundle(std::string_view pem);

    std::shared_ptr<X509> cert_;
};

// All certificates in a PEM bundle, in file order.
std::vector<Certificate> parse_pem_bundle(std::string_view pem);
// PEM or DER file; a PEM file may hold several certificates.
std::vector<Certificate> load_certificates(const std::filesystem::path& path);
// Every *.pem / *.crt file in a directory, sorted by file name.
std::vector<Certificate> load_root_store(const std::filesystem::path& dir);

CertificateChain to_chain(std::span<const Certificate> certs);

std::string read_file(const std::filesystem::path& path);

} // namespace metapolicy
