#include "metapolicy/fixtures/pki.hpp"

#include "metapolicy/errors.hpp"

#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/rand.h>
#include <openssl/x509.h>
#include <openssl/x509v3.h>

#include <memory>

namespace metapolicy::fixtures {

namespace {

using X509Ptr = std::unique_ptr<X509, decltype(&X509_free)>;

void add_extension(X509* cert, X509* issuer, int nid, const std::string& value)
{
    X509V3_CTX ctx;
    X509V3_set_ctx_nodb(&ctx);
    X509V3_set_ctx(&ctx, issuer, cert, nullptr, nullptr, 0);
    X509_EXTENSION* ext = X509V3_EXT_conf_nid(nullptr, &ctx, nid, value.c_str());
    if (!ext)
        throw CryptoError("cannot build X.509 extension " + value);
    X509_add_ext(cert, ext, -1);
    X509_EXTENSION_free(ext);
}

void set_time(ASN1_TIME* field, std::chrono::sys_seconds t)
{
    if (!ASN1_TIME_set(field, static_cast<time_t>(t.time_since_epoch().count())))
        throw CryptoError("cannot set certificate time");
}

} // namespace

Certificate issue_certificate(const CertOptions& opts, const PublicKey& subject_key, const Certificate* issuer,
                              const PrivateKey& issuer_key)
{
    X509Ptr cert(X509_new(), &X509_free);
    if (!cert)
        throw CryptoError("X509_new failed");
    X509_set_version(cert.get(), 2);

    unsigned char serial_bytes[16];
    RAND_bytes(serial_bytes, sizeof serial_bytes);
    serial_bytes[0] &= 0x7f;
    BIGNUM* serial = BN_bin2bn(serial_bytes, sizeof serial_bytes, nullptr);
    BN_to_ASN1_INTEGER(serial, X509_get_serialNumber(cert.get()));
    BN_free(serial);

    set_time(X509_getm_notBefore(cert.get()), opts.not_before);
    set_time(X509_getm_notAfter(cert.get()), opts.not_after);

    X509_NAME* name = X509_get_subject_name(cert.get());
    X509_NAME_add_entry_by_txt(name, "O", MBSTRING_UTF8, reinterpret_cast<const unsigned char*>("Metapolicy Fixtures"),
                               -1, -1, 0);
    X509_NAME_add_entry_by_txt(name, "CN", MBSTRING_UTF8,
                               reinterpret_cast<const unsigned char*>(opts.common_name.c_str()), -1, -1, 0);
    X509_set_issuer_name(cert.get(), issuer ? X509_get_subject_name(issuer->native()) : name);
    X509_set_pubkey(cert.get(), subject_key.native());

    X509* issuer_native = issuer ? issuer->native() : cert.get();
    add_extension(cert.get(), issuer_native, NID_basic_constraints, opts.ca ? "critical,CA:TRUE" : "critical,CA:FALSE");
    add_extension(cert.get(), issuer_native, NID_key_usage,
                  opts.ca ? "critical,keyCertSign,cRLSign" : "critical,digitalSignature");
    if (!opts.dns_names.empty()) {
        std::string san;
        for (const auto& n : opts.dns_names) {
            if (!san.empty())
                san += ",";
            san += "DNS:" + n;
        }
        add_extension(cert.get(), issuer_native, NID_subject_alt_name, san);
    }

    const EVP_MD* md = issuer_key.algorithm() == SignatureAlgorithm::ed25519 ? nullptr : EVP_sha256();
    if (X509_sign(cert.get(), issuer_key.native(), md) <= 0) {
        ERR_clear_error();
        throw CryptoError("X509_sign failed");
    }
    return Certificate::wrap(cert.get());
}

CertificateChain Pki::chain(bool include_root) const
{
    std::vector<Certificate> certs{leaf.cert, intermediate.cert};
    if (include_root)
        certs.push_back(root.cert);
    return to_chain(certs);
}

Pki make_pki(const DomainName& domain, const PkiOptions& opts)
{
    auto root_key = PrivateKey::generate(opts.ca_algorithm, opts.rsa_bits);
    auto root_cert = issue_certificate({opts.label + " Root CA", {}, opts.not_before, opts.not_after, true},
                                       root_key.public_key(), nullptr, root_key);

    auto inter_key = PrivateKey::generate(opts.ca_algorithm, opts.rsa_bits);
    auto inter_cert = issue_certificate({opts.label + " Intermediate CA", {}, opts.not_before, opts.not_after, true},
                                        inter_key.public_key(), &root_cert, root_key);

    auto leaf_key = PrivateKey::generate(opts.leaf_algorithm, opts.rsa_bits);
    auto names = opts.leaf_names.empty() ? std::vector<std::string>{domain.str()} : opts.leaf_names;
    auto leaf_cert = issue_certificate(
        {names.front(), names, opts.not_before, opts.leaf_not_after.value_or(opts.not_after), false},
        leaf_key.public_key(), &inter_cert, inter_key);

    return Pki{{root_key, root_cert}, {inter_key, inter_cert}, {leaf_key, leaf_cert}};
}

} // namespace metapolicy::fixtures
