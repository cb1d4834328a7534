#include "metapolicy/crypto.hpp"

#include "metapolicy/errors.hpp"

#include <openssl/bio.h>
#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/ec.h>
#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/param_build.h>
#include <openssl/pem.h>
#include <openssl/x509.h>
#include <openssl/x509v3.h>

#include <algorithm>
#include <ctime>
#include <fstream>
#include <sstream>

namespace metapolicy {

void detail::PkeyDeleter::operator()(EVP_PKEY* p) const noexcept
{
    EVP_PKEY_free(p);
}

void detail::X509Deleter::operator()(X509* p) const noexcept
{
    X509_free(p);
}

namespace {

constexpr std::size_t p256_coordinate = 32;

using BioPtr = std::unique_ptr<BIO, decltype(&BIO_free)>;
using BnPtr = std::unique_ptr<BIGNUM, decltype(&BN_free)>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)>;
using ParamBldPtr = std::unique_ptr<OSSL_PARAM_BLD, decltype(&OSSL_PARAM_BLD_free)>;
using ParamPtr = std::unique_ptr<OSSL_PARAM, decltype(&OSSL_PARAM_free)>;
using EcdsaSigPtr = std::unique_ptr<ECDSA_SIG, decltype(&ECDSA_SIG_free)>;

std::string openssl_error(std::string_view context)
{
    std::string out(context);
    unsigned long code = ERR_get_error();
    if (code != 0) {
        char buf[256];
        ERR_error_string_n(code, buf, sizeof buf);
        out += ": ";
        out += buf;
    }
    ERR_clear_error();
    return out;
}

BioPtr memory_bio(std::string_view data)
{
    BioPtr bio(BIO_new_mem_buf(data.data(), static_cast<int>(data.size())), &BIO_free);
    if (!bio)
        throw CryptoError(openssl_error("BIO_new_mem_buf"));
    return bio;
}

std::string drain(BIO* bio)
{
    char* data = nullptr;
    long len = BIO_get_mem_data(bio, &data);
    return std::string(data, static_cast<std::size_t>(len));
}

std::shared_ptr<EVP_PKEY> own(EVP_PKEY* p)
{
    return std::shared_ptr<EVP_PKEY>(p, detail::PkeyDeleter{});
}

SignatureAlgorithm detect_algorithm(EVP_PKEY* key)
{
    switch (EVP_PKEY_get_base_id(key)) {
    case EVP_PKEY_RSA: return SignatureAlgorithm::rsa_pkcs1_sha256;
    case EVP_PKEY_ED25519: return SignatureAlgorithm::ed25519;
    case EVP_PKEY_EC: {
        char group[64] = {};
        std::size_t len = 0;
        if (EVP_PKEY_get_utf8_string_param(key, OSSL_PKEY_PARAM_GROUP_NAME, group, sizeof group, &len) == 1 &&
            std::string_view(group, len) == "prime256v1")
            return SignatureAlgorithm::ecdsa_p256_sha256;
        throw SignError(SignError::Kind::unsupported_key, "only the P-256 curve is supported for ECDSA keys");
    }
    default: throw SignError(SignError::Kind::unsupported_key, "unsupported key type");
    }
}

const EVP_MD* digest_for(SignatureAlgorithm alg)
{
    return alg == SignatureAlgorithm::ed25519 ? nullptr : EVP_sha256();
}

Bytes ecdsa_der_to_raw(std::span<const std::uint8_t> der)
{
    const unsigned char* p = der.data();
    EcdsaSigPtr sig(d2i_ECDSA_SIG(nullptr, &p, static_cast<long>(der.size())), &ECDSA_SIG_free);
    if (!sig)
        throw CryptoError(openssl_error("d2i_ECDSA_SIG"));
    const BIGNUM* r = nullptr;
    const BIGNUM* s = nullptr;
    ECDSA_SIG_get0(sig.get(), &r, &s);
    Bytes raw(2 * p256_coordinate);
    BN_bn2binpad(r, raw.data(), p256_coordinate);
    BN_bn2binpad(s, raw.data() + p256_coordinate, p256_coordinate);
    return raw;
}

std::optional<Bytes> ecdsa_raw_to_der(std::span<const std::uint8_t> raw)
{
    if (raw.size() != 2 * p256_coordinate)
        return std::nullopt;
    EcdsaSigPtr sig(ECDSA_SIG_new(), &ECDSA_SIG_free);
    BIGNUM* r = BN_bin2bn(raw.data(), p256_coordinate, nullptr);
    BIGNUM* s = BN_bin2bn(raw.data() + p256_coordinate, p256_coordinate, nullptr);
    if (!sig || !r || !s || ECDSA_SIG_set0(sig.get(), r, s) != 1) {
        BN_free(r);
        BN_free(s);
        return std::nullopt;
    }
    int len = i2d_ECDSA_SIG(sig.get(), nullptr);
    if (len <= 0)
        return std::nullopt;
    Bytes der(static_cast<std::size_t>(len));
    unsigned char* out = der.data();
    i2d_ECDSA_SIG(sig.get(), &out);
    return der;
}

Bytes bn_bytes(const BIGNUM* bn)
{
    Bytes out(static_cast<std::size_t>(BN_num_bytes(bn)));
    BN_bn2bin(bn, out.data());
    return out;
}

std::shared_ptr<EVP_PKEY> from_params(const char* type, OSSL_PARAM_BLD* bld)
{
    ParamPtr params(OSSL_PARAM_BLD_to_param(bld), &OSSL_PARAM_free);
    PkeyCtxPtr ctx(EVP_PKEY_CTX_new_from_name(nullptr, type, nullptr), &EVP_PKEY_CTX_free);
    EVP_PKEY* key = nullptr;
    if (!params || !ctx || EVP_PKEY_fromdata_init(ctx.get()) != 1 ||
        EVP_PKEY_fromdata(ctx.get(), &key, EVP_PKEY_PUBLIC_KEY, params.get()) != 1)
        throw CryptoError(openssl_error("EVP_PKEY_fromdata"));
    return own(key);
}

std::chrono::sys_seconds asn1_time(const ASN1_TIME* t)
{
    std::tm tm{};
    if (ASN1_TIME_to_tm(t, &tm) != 1)
        throw CryptoError("unreadable certificate validity time");
    return std::chrono::sys_seconds(std::chrono::seconds(timegm(&tm)));
}

} // namespace

std::uint8_t dnssec_algorithm_number(SignatureAlgorithm alg) noexcept
{
    switch (alg) {
    case SignatureAlgorithm::rsa_pkcs1_sha256: return 8;
    case SignatureAlgorithm::ecdsa_p256_sha256: return 13;
    case SignatureAlgorithm::ed25519: return 15;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// PublicKey
// ---------------------------------------------------------------------------

PublicKey::PublicKey(std::shared_ptr<EVP_PKEY> key)
    : key_(std::move(key))
    , algorithm_(detect_algorithm(key_.get()))
{}

PublicKey PublicKey::from_spki_der(std::span<const std::uint8_t> der)
{
    const unsigned char* p = der.data();
    EVP_PKEY* key = d2i_PUBKEY(nullptr, &p, static_cast<long>(der.size()));
    if (!key)
        throw CryptoError(openssl_error("d2i_PUBKEY"));
    return PublicKey(own(key));
}

PublicKey PublicKey::from_pem(std::string_view pem)
{
    auto bio = memory_bio(pem);
    EVP_PKEY* key = PEM_read_bio_PUBKEY(bio.get(), nullptr, nullptr, nullptr);
    if (!key)
        throw CryptoError(openssl_error("PEM_read_bio_PUBKEY"));
    return PublicKey(own(key));
}

PublicKey PublicKey::from_dnskey(const DnskeyRdata& rdata)
{
    const auto& k = rdata.public_key;
    switch (rdata.algorithm) {
    case 8: {
        // RFC 3110: exponent length (1 byte, or 0 then 2 bytes), exponent, modulus.
        std::size_t pos = 0;
        std::size_t exp_len = 0;
        if (k.empty())
            throw CryptoError("empty RSA DNSKEY");
        if (k[0] != 0) {
            exp_len = k[0];
            pos = 1;
        } else {
            if (k.size() < 3)
                throw CryptoError("truncated RSA DNSKEY");
            exp_len = (std::size_t{k[1]} << 8) | k[2];
            pos = 3;
        }
        if (exp_len == 0 || pos + exp_len >= k.size())
            throw CryptoError("truncated RSA DNSKEY");
        BnPtr e(BN_bin2bn(k.data() + pos, static_cast<int>(exp_len), nullptr), &BN_free);
        BnPtr n(BN_bin2bn(k.data() + pos + exp_len, static_cast<int>(k.size() - pos - exp_len), nullptr), &BN_free);
        ParamBldPtr bld(OSSL_PARAM_BLD_new(), &OSSL_PARAM_BLD_free);
        if (!e || !n || !bld || OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_N, n.get()) != 1 ||
            OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_E, e.get()) != 1)
            throw CryptoError(openssl_error("RSA DNSKEY import"));
        return PublicKey(from_params("RSA", bld.get()));
    }
    case 13: {
        if (k.size() != 2 * p256_coordinate)
            throw CryptoError("ECDSA P-256 DNSKEY must be 64 bytes");
        Bytes point;
        point.reserve(k.size() + 1);
        point.push_back(0x04);
        point.insert(point.end(), k.begin(), k.end());
        ParamBldPtr bld(OSSL_PARAM_BLD_new(), &OSSL_PARAM_BLD_free);
        if (!bld || OSSL_PARAM_BLD_push_utf8_string(bld.get(), OSSL_PKEY_PARAM_GROUP_NAME, "prime256v1", 0) != 1 ||
            OSSL_PARAM_BLD_push_octet_string(bld.get(), OSSL_PKEY_PARAM_PUB_KEY, point.data(), point.size()) != 1)
            throw CryptoError(openssl_error("ECDSA DNSKEY import"));
        return PublicKey(from_params("EC", bld.get()));
    }
    case 15: {
        EVP_PKEY* key = EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, k.data(), k.size());
        if (!key)
            throw CryptoError(openssl_error("Ed25519 DNSKEY import"));
        return PublicKey(own(key));
    }
    default: throw CryptoError("unsupported DNSKEY algorithm " + std::to_string(rdata.algorithm));
    }
}

Bytes PublicKey::spki_der() const
{
    int len = i2d_PUBKEY(key_.get(), nullptr);
    if (len <= 0)
        throw CryptoError(openssl_error("i2d_PUBKEY"));
    Bytes out(static_cast<std::size_t>(len));
    unsigned char* p = out.data();
    i2d_PUBKEY(key_.get(), &p);
    return out;
}

DnskeyRdata PublicKey::to_dnskey(std::uint16_t flags) const
{
    DnskeyRdata out;
    out.flags = flags;
    out.protocol = 3;
    out.algorithm = dnssec_algorithm_number(algorithm_);
    switch (algorithm_) {
    case SignatureAlgorithm::rsa_pkcs1_sha256: {
        BIGNUM* n = nullptr;
        BIGNUM* e = nullptr;
        if (EVP_PKEY_get_bn_param(key_.get(), OSSL_PKEY_PARAM_RSA_N, &n) != 1 ||
            EVP_PKEY_get_bn_param(key_.get(), OSSL_PKEY_PARAM_RSA_E, &e) != 1) {
            BN_free(n);
            BN_free(e);
            throw CryptoError(openssl_error("RSA key export"));
        }
        BnPtr n_owned(n, &BN_free);
        BnPtr e_owned(e, &BN_free);
        Bytes exp = bn_bytes(e);
        if (exp.size() <= 255) {
            out.public_key.push_back(static_cast<std::uint8_t>(exp.size()));
        } else {
            out.public_key.push_back(0);
            out.public_key.push_back(static_cast<std::uint8_t>(exp.size() >> 8));
            out.public_key.push_back(static_cast<std::uint8_t>(exp.size() & 0xff));
        }
        out.public_key.insert(out.public_key.end(), exp.begin(), exp.end());
        Bytes mod = bn_bytes(n);
        out.public_key.insert(out.public_key.end(), mod.begin(), mod.end());
        break;
    }
    case SignatureAlgorithm::ecdsa_p256_sha256: {
        unsigned char point[1 + 2 * p256_coordinate];
        std::size_t len = 0;
        if (EVP_PKEY_get_octet_string_param(key_.get(), OSSL_PKEY_PARAM_ENCODED_PUBLIC_KEY, point, sizeof point,
                                            &len) != 1 ||
            len != sizeof point || point[0] != 0x04)
            throw CryptoError(openssl_error("ECDSA key export"));
        out.public_key.assign(point + 1, point + len);
        break;
    }
    case SignatureAlgorithm::ed25519: {
        std::size_t len = 32;
        out.public_key.resize(len);
        if (EVP_PKEY_get_raw_public_key(key_.get(), out.public_key.data(), &len) != 1)
            throw CryptoError(openssl_error("Ed25519 key export"));
        out.public_key.resize(len);
        break;
    }
    }
    return out;
}

bool PublicKey::verify(std::span<const std::uint8_t> data, std::span<const std::uint8_t> signature) const
{
    std::optional<Bytes> der;
    std::span<const std::uint8_t> sig = signature;
    if (algorithm_ == SignatureAlgorithm::ecdsa_p256_sha256) {
        der = ecdsa_raw_to_der(signature);
        if (!der)
            return false;
        sig = *der;
    }
    MdCtxPtr ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, digest_for(algorithm_), nullptr, key_.get()) != 1) {
        ERR_clear_error();
        return false;
    }
    int rc = EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), data.data(), data.size());
    ERR_clear_error();
    return rc == 1;
}

bool operator==(const PublicKey& a, const PublicKey& b)
{
    return EVP_PKEY_eq(a.key_.get(), b.key_.get()) == 1;
}

// ---------------------------------------------------------------------------
// PrivateKey
// ---------------------------------------------------------------------------

PrivateKey::PrivateKey(std::shared_ptr<EVP_PKEY> key)
    : key_(std::move(key))
    , algorithm_(detect_algorithm(key_.get()))
{}

PrivateKey PrivateKey::generate(SignatureAlgorithm alg, unsigned rsa_bits)
{
    EVP_PKEY* key = nullptr;
    switch (alg) {
    case SignatureAlgorithm::rsa_pkcs1_sha256:
        key = EVP_PKEY_Q_keygen(nullptr, nullptr, "RSA", static_cast<std::size_t>(rsa_bits));
        break;
    case SignatureAlgorithm::ecdsa_p256_sha256: key = EVP_PKEY_Q_keygen(nullptr, nullptr, "EC", "P-256"); break;
    case SignatureAlgorithm::ed25519: key = EVP_PKEY_Q_keygen(nullptr, nullptr, "ED25519"); break;
    }
    if (!key)
        throw CryptoError(openssl_error("key generation"));
    return PrivateKey(own(key));
}

PrivateKey PrivateKey::from_pem(std::string_view pem)
{
    auto bio = memory_bio(pem);
    EVP_PKEY* key = PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr);
    if (!key)
        throw CryptoError(openssl_error("PEM_read_bio_PrivateKey"));
    return PrivateKey(own(key));
}

PrivateKey PrivateKey::from_der(std::span<const std::uint8_t> der)
{
    const unsigned char* p = der.data();
    EVP_PKEY* key = d2i_AutoPrivateKey(nullptr, &p, static_cast<long>(der.size()));
    if (!key)
        throw CryptoError(openssl_error("d2i_AutoPrivateKey"));
    return PrivateKey(own(key));
}

PrivateKey PrivateKey::load(const std::filesystem::path& path)
{
    std::string data = read_file(path);
    if (data.find("-----BEGIN") != std::string::npos)
        return from_pem(data);
    return from_der(std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

PublicKey PrivateKey::public_key() const
{
    int len = i2d_PUBKEY(key_.get(), nullptr);
    if (len <= 0)
        throw CryptoError(openssl_error("i2d_PUBKEY"));
    Bytes der(static_cast<std::size_t>(len));
    unsigned char* p = der.data();
    i2d_PUBKEY(key_.get(), &p);
    return PublicKey::from_spki_der(der);
}

std::string PrivateKey::to_pem() const
{
    BioPtr bio(BIO_new(BIO_s_mem()), &BIO_free);
    if (!bio || PEM_write_bio_PrivateKey(bio.get(), key_.get(), nullptr, nullptr, 0, nullptr, nullptr) != 1)
        throw CryptoError(openssl_error("PEM_write_bio_PrivateKey"));
    return drain(bio.get());
}

Bytes PrivateKey::sign(std::span<const std::uint8_t> data) const
{
    MdCtxPtr ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, digest_for(algorithm_), nullptr, key_.get()) != 1)
        throw CryptoError(openssl_error("EVP_DigestSignInit"));
    std::size_t len = 0;
    if (EVP_DigestSign(ctx.get(), nullptr, &len, data.data(), data.size()) != 1)
        throw CryptoError(openssl_error("EVP_DigestSign"));
    Bytes sig(len);
    if (EVP_DigestSign(ctx.get(), sig.data(), &len, data.data(), data.size()) != 1)
        throw CryptoError(openssl_error("EVP_DigestSign"));
    sig.resize(len);
    if (algorithm_ == SignatureAlgorithm::ecdsa_p256_sha256)
        return ecdsa_der_to_raw(sig);
    return sig;
}

// ---------------------------------------------------------------------------
// Certificate
// ---------------------------------------------------------------------------

Certificate Certificate::from_der(std::span<const std::uint8_t> der)
{
    const unsigned char* p = der.data();
    X509* cert = d2i_X509(nullptr, &p, static_cast<long>(der.size()));
    if (!cert)
        throw CryptoError(openssl_error("d2i_X509"));
    if (p != der.data() + der.size()) {
        X509_free(cert);
        throw CryptoError("trailing bytes after DER certificate");
    }
    return Certificate(std::shared_ptr<X509>(cert, detail::X509Deleter{}));
}

Certificate Certificate::from_pem(std::string_view pem)
{
    auto certs = parse_pem_bundle(pem);
    if (certs.empty())
        throw CryptoError("no certificate in PEM input");
    return certs.front();
}

Certificate Certificate::wrap(X509* cert)
{
    X509_up_ref(cert);
    return Certificate(std::shared_ptr<X509>(cert, detail::X509Deleter{}));
}

Bytes Certificate::der() const
{
    int len = i2d_X509(cert_.get(), nullptr);
    if (len <= 0)
        throw CryptoError(openssl_error("i2d_X509"));
    Bytes out(static_cast<std::size_t>(len));
    unsigned char* p = out.data();
    i2d_X509(cert_.get(), &p);
    return out;
}

std::string Certificate::to_pem() const
{
    BioPtr bio(BIO_new(BIO_s_mem()), &BIO_free);
    if (!bio || PEM_write_bio_X509(bio.get(), cert_.get()) != 1)
        throw CryptoError(openssl_error("PEM_write_bio_X509"));
    return drain(bio.get());
}

std::string Certificate::subject_text() const
{
    BioPtr bio(BIO_new(BIO_s_mem()), &BIO_free);
    X509_NAME_print_ex(bio.get(), X509_get_subject_name(cert_.get()), 0, XN_FLAG_RFC2253);
    return drain(bio.get());
}

std::chrono::sys_seconds Certificate::not_before() const
{
    return asn1_time(X509_get0_notBefore(cert_.get()));
}

std::chrono::sys_seconds Certificate::not_after() const
{
    return asn1_time(X509_get0_notAfter(cert_.get()));
}

bool Certificate::valid_at(std::chrono::sys_seconds t) const
{
    return not_before() <= t && t <= not_after();
}

PublicKey Certificate::public_key() const
{
    EVP_PKEY* key = X509_get0_pubkey(cert_.get());
    if (!key)
        throw CryptoError(openssl_error("X509_get0_pubkey"));
    int len = i2d_PUBKEY(key, nullptr);
    Bytes der(static_cast<std::size_t>(std::max(len, 0)));
    unsigned char* p = der.data();
    i2d_PUBKEY(key, &p);
    return PublicKey::from_spki_der(der);
}

bool Certificate::is_ca() const
{
    return X509_check_ca(cert_.get()) > 0;
}

std::vector<std::string> Certificate::dns_names() const
{
    std::vector<std::string> names;
    int crit = 0;
    auto* sans = static_cast<GENERAL_NAMES*>(X509_get_ext_d2i(cert_.get(), NID_subject_alt_name, &crit, nullptr));
    if (sans) {
        for (int i = 0; i < sk_GENERAL_NAME_num(sans); ++i) {
            const GENERAL_NAME* gn = sk_GENERAL_NAME_value(sans, i);
            if (gn->type != GEN_DNS)
                continue;
            const ASN1_IA5STRING* s = gn->d.dNSName;
            names.emplace_back(reinterpret_cast<const char*>(ASN1_STRING_get0_data(s)),
                               static_cast<std::size_t>(ASN1_STRING_length(s)));
        }
        GENERAL_NAMES_free(sans);
        return names;
    }
    X509_NAME* subject = X509_get_subject_name(cert_.get());
    int idx = X509_NAME_get_index_by_NID(subject, NID_commonName, -1);
    if (idx >= 0) {
        const ASN1_STRING* cn = X509_NAME_ENTRY_get_data(X509_NAME_get_entry(subject, idx));
        names.emplace_back(reinterpret_cast<const char*>(ASN1_STRING_get0_data(cn)),
                           static_cast<std::size_t>(ASN1_STRING_length(cn)));
    }
    return names;
}

bool Certificate::issued_by_name(const Certificate& issuer) const
{
    return X509_NAME_cmp(X509_get_issuer_name(cert_.get()), X509_get_subject_name(issuer.cert_.get())) == 0;
}

bool Certificate::signature_verifies_with(const PublicKey& issuer_key) const
{
    int rc = X509_verify(cert_.get(), issuer_key.native());
    ERR_clear_error();
    return rc == 1;
}

bool Certificate::same_subject(const Certificate& other) const
{
    return X509_NAME_cmp(X509_get_subject_name(cert_.get()), X509_get_subject_name(other.cert_.get())) == 0;
}

// ---------------------------------------------------------------------------
// loading
// ---------------------------------------------------------------------------

std::vector<Certificate> parse_pem_bundle(std::string_view pem)
{
    std::vector<Certificate> out;
    auto bio = memory_bio(pem);
    while (X509* cert = PEM_read_bio_X509(bio.get(), nullptr, nullptr, nullptr))
        out.push_back(Certificate(std::shared_ptr<X509>(cert, detail::X509Deleter{})));
    ERR_clear_error();
    return out;
}

std::vector<Certificate> load_certificates(const std::filesystem::path& path)
{
    std::string data = read_file(path);
    if (data.find("-----BEGIN") != std::string::npos) {
        auto certs = parse_pem_bundle(data);
        if (certs.empty())
            throw CryptoError("no certificates in " + path.string());
        return certs;
    }
    return {Certificate::from_der(std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()))};
}

std::vector<Certificate> load_root_store(const std::filesystem::path& dir)
{
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".pem" || ext == ".crt"))
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Certificate> out;
    for (const auto& f : files) {
        auto certs = load_certificates(f);
        out.insert(out.end(), certs.begin(), certs.end());
    }
    return out;
}

CertificateChain to_chain(std::span<const Certificate> certs)
{
    CertificateChain chain;
    for (const auto& c : certs)
        chain.certificates.push_back(c.der());
    return chain;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace metapolicy
