#include "support.hpp"

#include "metapolicy/encoding.hpp"

#include <gtest/gtest.h>

#include <openssl/bn.h>
#include <openssl/ecdsa.h>
#include <openssl/evp.h>
#include <openssl/x509.h>
#include <openssl/x509_vfy.h>

#include <random>

namespace mp = metapolicy;
namespace trust = metapolicy::trust;
namespace chr = std::chrono;
using trust::VerificationStatus;

namespace {

// Plain EVP verification, independent of the library's signature wrapper.
bool oracle_verify(const mp::Certificate& leaf, std::string_view data, const mp::Bytes& sig)
{
    EVP_PKEY* key = X509_get0_pubkey(leaf.native());
    mp::Bytes der_sig = sig;
    if (EVP_PKEY_get_base_id(key) == EVP_PKEY_EC) {
        if (sig.size() != 64)
            return false;
        ECDSA_SIG* s = ECDSA_SIG_new();
        ECDSA_SIG_set0(s, BN_bin2bn(sig.data(), 32, nullptr), BN_bin2bn(sig.data() + 32, 32, nullptr));
        unsigned char* out = nullptr;
        int len = i2d_ECDSA_SIG(s, &out);
        der_sig.assign(out, out + len);
        OPENSSL_free(out);
        ECDSA_SIG_free(s);
    }
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    const EVP_MD* md = EVP_PKEY_get_base_id(key) == EVP_PKEY_ED25519 ? nullptr : EVP_sha256();
    bool ok = EVP_DigestVerifyInit(ctx, nullptr, md, nullptr, key) == 1 &&
              EVP_DigestVerify(ctx, der_sig.data(), der_sig.size(), reinterpret_cast<const unsigned char*>(data.data()),
                               data.size()) == 1;
    EVP_MD_CTX_free(ctx);
    return ok;
}

// OpenSSL's own path validation at time `t`.
bool oracle_chain_ok(const mp::CertificateChain& chain, const std::vector<mp::Certificate>& roots, chr::sys_seconds t)
{
    X509_STORE* store = X509_STORE_new();
    for (const auto& r : roots)
        X509_STORE_add_cert(store, r.native());
    STACK_OF(X509)* untrusted = sk_X509_new_null();
    std::vector<mp::Certificate> held;
    for (const auto& der : chain.certificates)
        held.push_back(mp::Certificate::from_der(der));
    for (std::size_t i = 1; i < held.size(); ++i)
        sk_X509_push(untrusted, held[i].native());
    X509_STORE_CTX* ctx = X509_STORE_CTX_new();
    X509_STORE_CTX_init(ctx, store, held.front().native(), untrusted);
    X509_STORE_CTX_set_time(ctx, 0, t.time_since_epoch().count());
    bool ok = X509_verify_cert(ctx) == 1;
    X509_STORE_CTX_free(ctx);
    sk_X509_free(untrusted);
    X509_STORE_free(store);
    return ok;
}

mp::Draft varied_draft(std::mt19937_64& rng, const mp::DomainName& domain)
{
    auto d = support::sized_draft(domain, 1 + rng() % 1000, rng() % 700);
    d.policies.push_back({7489, "v=DMARC1; p=reject; pct=" + std::to_string(rng() % 100), {mp::FailMode::ignore, {}}});
    return d;
}

using Mutation = void (*)(mp::Metapolicy&);

const Mutation mutations[] = {
    [](mp::Metapolicy& m) { m.signature.value[m.signature.value.size() / 2] ^= 0x01; },
    [](mp::Metapolicy& m) { m.signature.value.front() ^= 0x80; },
    [](mp::Metapolicy& m) { m.header.version += 1; },
    [](mp::Metapolicy& m) { m.header.parts += 1; },
    [](mp::Metapolicy& m) { m.policies.front().specification.back() ^= 0x01; },
    [](mp::Metapolicy& m) { m.policies.front().fail.mode = mp::FailMode::ignore; },
    [](mp::Metapolicy& m) { m.policies.front().fail.report_addresses.push_back("attacker@evil.example"); },
    [](mp::Metapolicy& m) { m.header.subdomains.clear(); },
    [](mp::Metapolicy& m) { m.header.validity.valid_to = chr::year{2026} / 1 / 1; },
    [](mp::Metapolicy& m) { std::swap(m.policies.front(), m.policies.back()); },
};

} // namespace

TEST(Trust, SignVerifyAgreesWithOracleAndDetectsMutations)
{
    std::mt19937_64 rng(42);
    auto domain = mp::DomainName::parse("mutate.example");
    const auto& pki = support::fast_pki(domain.str());
    auto cfg = support::trust_for(pki);
    for (int round = 0; round < 100; ++round) {
        auto m = trust::sign(varied_draft(rng, domain), pki.leaf.key, pki.chain(false));
        ASSERT_TRUE(trust::verify(m, cfg).valid());
        ASSERT_TRUE(oracle_verify(pki.leaf.cert, mp::signing_input(m), m.signature.value));
        for (std::size_t k = 0; k < std::size(mutations); ++k) {
            auto bad = m;
            mutations[k](bad);
            auto r = trust::verify(bad, cfg);
            ASSERT_EQ(r.status, VerificationStatus::invalid_signature) << "round " << round << " mutation " << k << ": "
                                                                       << r.details;
            ASSERT_FALSE(oracle_verify(pki.leaf.cert, mp::signing_input(bad), bad.signature.value));
        }
    }
}

TEST(Trust, AllSignatureAlgorithmsRoundTrip)
{
    auto domain = mp::DomainName::parse("algs.example");
    for (auto alg : {mp::SignatureAlgorithm::rsa_pkcs1_sha256, mp::SignatureAlgorithm::ecdsa_p256_sha256,
                     mp::SignatureAlgorithm::ed25519}) {
        auto key = mp::PrivateKey::generate(alg);
        auto sig = key.sign(mp::as_bytes("hello"));
        EXPECT_TRUE(key.public_key().verify(mp::as_bytes("hello"), sig)) << mp::to_string(alg);
        EXPECT_FALSE(key.public_key().verify(mp::as_bytes("hellO"), sig)) << mp::to_string(alg);
        auto dnskey = key.public_key().to_dnskey();
        EXPECT_EQ(dnskey.algorithm, mp::dnssec_algorithm_number(alg));
        EXPECT_EQ(mp::PublicKey::from_dnskey(dnskey), key.public_key());
    }
    EXPECT_EQ(mp::dnssec_algorithm_number(mp::SignatureAlgorithm::rsa_pkcs1_sha256), 8);
    EXPECT_EQ(mp::dnssec_algorithm_number(mp::SignatureAlgorithm::ecdsa_p256_sha256), 13);
    EXPECT_EQ(mp::dnssec_algorithm_number(mp::SignatureAlgorithm::ed25519), 15);
}

TEST(Trust, ChainBreakIsInvalidChain)
{
    auto domain = mp::DomainName::parse("break.example");
    const auto& pki = support::fast_pki(domain.str());
    const auto& other = support::fast_pki(domain.str(), "Other");
    auto m = trust::sign(support::sized_draft(domain, 1), pki.leaf.key, pki.chain(false));
    m.chain.certificates[1] = other.intermediate.cert.der();
    auto cfg = support::trust_for(pki);
    EXPECT_EQ(trust::verify(m, cfg).status, VerificationStatus::invalid_chain);
    EXPECT_FALSE(oracle_chain_ok(m.chain, cfg.root_store, cfg.now()));

    m.chain.certificates[1] = mp::Bytes{0x30, 0x03, 0x02, 0x01, 0x01};
    EXPECT_EQ(trust::verify(m, cfg).status, VerificationStatus::invalid_chain);
}

TEST(Trust, LeafActingAsIssuerIsInvalidChain)
{
    auto domain = mp::DomainName::parse("noca.example");
    auto ca_key = mp::PrivateKey::generate(mp::SignatureAlgorithm::ecdsa_p256_sha256);
    auto leaf_key = mp::PrivateKey::generate(mp::SignatureAlgorithm::ecdsa_p256_sha256);
    chr::sys_seconds from = chr::sys_days(chr::year{2020} / 1 / 1), to = chr::sys_days(chr::year{2030} / 1 / 1);
    auto root = mp::fixtures::issue_certificate({"Root", {}, from, to, true}, ca_key.public_key(), nullptr, ca_key);
    auto not_ca_key = mp::PrivateKey::generate(mp::SignatureAlgorithm::ecdsa_p256_sha256);
    auto not_ca = mp::fixtures::issue_certificate({"Not CA", {}, from, to, false}, not_ca_key.public_key(), &root, ca_key);
    auto leaf = mp::fixtures::issue_certificate({domain.str(), {domain.str()}, from, to, false}, leaf_key.public_key(),
                                                &not_ca, not_ca_key);
    auto m = trust::sign(support::sized_draft(domain, 1), leaf_key, {{leaf.der(), not_ca.der()}});
    trust::TrustConfig cfg;
    cfg.root_store = {root};
    cfg.clock = trust::fixed_clock(chr::year{2024} / 6 / 1);
    EXPECT_EQ(trust::verify(m, cfg).status, VerificationStatus::invalid_chain);
    EXPECT_FALSE(oracle_chain_ok(m.chain, cfg.root_store, cfg.now()));
}

TEST(Trust, UnknownRootIsUntrusted)
{
    auto domain = mp::DomainName::parse("untrusted.example");
    const auto& pki = support::fast_pki(domain.str());
    const auto& other = support::fast_pki("elsewhere.example");
    auto m = trust::sign(support::sized_draft(domain, 1), pki.leaf.key, pki.chain(false));
    auto cfg = support::trust_for(other);
    EXPECT_EQ(trust::verify(m, cfg).status, VerificationStatus::untrusted_root);
    EXPECT_FALSE(oracle_chain_ok(m.chain, cfg.root_store, cfg.now()));

    // Shipping the root in the chain does not make it trusted.
    auto with_root = trust::sign(support::sized_draft(domain, 1), pki.leaf.key, pki.chain(true));
    EXPECT_EQ(trust::verify(with_root, cfg).status, VerificationStatus::untrusted_root);
    EXPECT_TRUE(trust::verify(with_root, support::trust_for(pki)).valid());
}

TEST(Trust, ExpiredLeaf)
{
    auto domain = mp::DomainName::parse("expired.example");
    mp::fixtures::PkiOptions opts;
    opts.ca_algorithm = opts.leaf_algorithm = mp::SignatureAlgorithm::ecdsa_p256_sha256;
    opts.leaf_not_after = chr::sys_days(chr::year{2022} / 1 / 1);
    auto pki = mp::fixtures::make_pki(domain, opts);
    auto m = trust::sign(support::sized_draft(domain, 1), pki.leaf.key, pki.chain(false));
    auto cfg = support::trust_for(pki);
    EXPECT_EQ(trust::verify(m, cfg).status, VerificationStatus::expired_certificate);
    EXPECT_FALSE(oracle_chain_ok(m.chain, cfg.root_store, cfg.now()));
    EXPECT_TRUE(trust::verify(m, support::trust_for(pki, chr::year{2021} / 6 / 1)).valid());
    EXPECT_TRUE(oracle_chain_ok(m.chain, cfg.root_store, chr::sys_days(chr::year{2021} / 6 / 1)));
}

TEST(Trust, DomainMismatch)
{
    auto domain = mp::DomainName::parse("mismatch.example");
    const auto& pki = support::fast_pki("other.example");
    // sign() refuses, so forge by replacing the header after signing a covered draft.
    auto m = trust::sign(support::sized_draft(mp::DomainName::parse("other.example"), 1), pki.leaf.key, pki.chain(false));
    m.header.domain = domain;
    m.header.subdomains = {mp::SubdomainPattern::parse("www.mismatch.example")};
    m.policies.front().fail.report_addresses = {"report@mismatch.example"};
    EXPECT_EQ(trust::verify(m, support::trust_for(pki)).status, VerificationStatus::domain_mismatch);
    EXPECT_THROW(trust::sign(support::sized_draft(domain, 1), pki.leaf.key, pki.chain(false)), mp::SignError);
}

TEST(Trust, SignRefusesForeignKey)
{
    auto domain = mp::DomainName::parse("foreign.example");
    const auto& pki = support::fast_pki(domain.str());
    auto stranger = mp::PrivateKey::generate(mp::SignatureAlgorithm::ecdsa_p256_sha256);
    try {
        trust::sign(support::sized_draft(domain, 1), stranger, pki.chain(false));
        FAIL();
    } catch (const mp::SignError& e) {
        EXPECT_EQ(e.kind(), mp::SignError::Kind::key_leaf_mismatch);
    }
}

TEST(Trust, ValidityWindowOfTheMetapolicy)
{
    auto domain = mp::DomainName::parse("window.example");
    const auto& pki = support::fast_pki(domain.str());
    auto m = trust::sign(support::sized_draft(domain, 1), pki.leaf.key, pki.chain(false));
    EXPECT_TRUE(trust::verify(m, support::trust_for(pki, chr::year{2025} / 12 / 31)).valid());
    EXPECT_EQ(trust::verify(m, support::trust_for(pki, chr::year{2026} / 1 / 1)).status,
              VerificationStatus::outside_validity_window);
    EXPECT_EQ(trust::verify(m, support::trust_for(pki, chr::year{2019} / 12 / 31)).status,
              VerificationStatus::outside_validity_window);
}

TEST(Trust, GoldenFixtureVerifies)
{
    auto cfg = support::example_trust();
    for (const char* file : {"example/example.mpol", "example/example.published.mpol"}) {
        auto m = mp::parse(support::read_data(file));
        auto r = trust::verify(m, cfg);
        EXPECT_TRUE(r.valid()) << file << ": " << r.details;
        auto leaf = mp::Certificate::from_der(m.chain.certificates.front());
        EXPECT_TRUE(oracle_verify(leaf, mp::signing_input(m), m.signature.value)) << file;
        EXPECT_TRUE(oracle_chain_ok(m.chain, cfg.root_store, cfg.now())) << file;
    }
}

TEST(Trust, HostNameMatching)
{
    auto www = mp::DomainName::parse("www.a.com");
    EXPECT_TRUE(trust::dns_name_matches("*.a.com", www));
    EXPECT_TRUE(trust::dns_name_matches("WWW.A.COM.", www));
    EXPECT_FALSE(trust::dns_name_matches("*.a.com", mp::DomainName::parse("a.com")));
    EXPECT_FALSE(trust::dns_name_matches("*.a.com", mp::DomainName::parse("x.www.a.com")));
    EXPECT_FALSE(trust::dns_name_matches("*.com", mp::DomainName::parse("a.com")));
}

TEST(Trust, DnssecModeUsesAnchoredKeys)
{
    auto domain = mp::DomainName::parse("dnssec.example");
    auto key = mp::PrivateKey::generate(mp::SignatureAlgorithm::ecdsa_p256_sha256);
    auto m = trust::sign(support::sized_draft(domain, 1), key);
    mp::testnet::ZoneFixture zone;
    zone.add(domain, mp::dns::RecordType::DNSKEY, mp::dns::encode_dnskey(key.public_key().to_dnskey()));
    auto net = mp::testnet::serve(std::move(zone));

    trust::TrustConfig cfg;
    cfg.clock = trust::fixed_clock(chr::year{2024} / 6 / 1);
    EXPECT_EQ(trust::verify(m, cfg, net.get()).status, VerificationStatus::no_key_material);
    cfg.dnssec_anchors[domain] = {key.public_key().to_dnskey()};
    EXPECT_EQ(trust::verify(m, cfg, nullptr).status, VerificationStatus::no_key_material);
    EXPECT_TRUE(trust::verify(m, cfg, net.get()).valid());
    auto bad = m;
    bad.header.version = 9;
    EXPECT_EQ(trust::verify(bad, cfg, net.get()).status, VerificationStatus::invalid_signature);
}
