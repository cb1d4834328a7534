#pragma once

#include "metapolicy/cache.hpp"
#include "metapolicy/evaluators.hpp"
#include "metapolicy/reports.hpp"
#include "metapolicy/resolver.hpp"
#include "metapolicy/trust.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

namespace metapolicy {

// Verification or decoding failed for a metapolicy that is present in DNS.
// Callers must treat the domain as unsafe.
class HardFailure : public Error
{
public:
    HardFailure(std::string reason, std::optional<trust::VerificationStatus> status = std::nullopt)
        : Error("hard failure: " + reason)
        , status_(status)
    {}

    const std::optional<trust::VerificationStatus>& status() const noexcept { return status_; }

private:
    std::optional<trust::VerificationStatus> status_;
};

enum class Decision { proceed, warn_and_proceed, terminate };
std::string_view to_string(Decision d) noexcept;

enum class EnforcementStatus { passed, failed, unsupported, not_present };
std::string_view to_string(EnforcementStatus s) noexcept;

struct EnforcementOutcome
{
    Decision decision = Decision::proceed;
    std::uint32_t policy_id = 0;
    EnforcementStatus status = EnforcementStatus::passed;
    std::string detail;
    std::vector<ReportEvent> reports;
};

struct ExpiryOutcome
{
    CacheEntry entry;
    std::optional<ReportEvent> report;
};

struct AgentOptions
{
    WildcardMode wildcard_mode = WildcardMode::single_label;
    // Refuse part counts above this before fetching anything.
    std::uint32_t max_parts = 256;
    std::function<void(const std::string&)> warn;
};

class Agent
{
public:
    Agent(std::shared_ptr<ResolverPort> resolver, trust::TrustConfig cfg, std::shared_ptr<PolicyCache> cache,
          std::shared_ptr<ReportSink> sink = nullptr, AgentOptions options = {});

    // Cached: one part-1 query; a higher published version is fetched in
    // full, verified and replaces the entry. Anything else keeps the cached
    // copy in force. Uncached: full fetch, verify, cache.
    //
    // Throws HardFailure when a present metapolicy fails to decode or
    // verify, ResolutionError when nothing is cached and part 1 cannot be
    // obtained (absent() distinguishes NXDOMAIN from transport failure).
    Metapolicy lookup(const DomainName& domain);

    // The nearest policy-bearing ancestor's metapolicy, if it lists `sub`.
    // `sub`'s own metapolicy wins when it has one.
    std::optional<Metapolicy> lookup_for_subdomain(const DomainName& sub);

    // For an entry past Valid To: adopt a newer published version, or keep
    // the entry marked stale and report its use.
    ExpiryOutcome handle_expiry(const CacheEntry& entry);

    EnforcementOutcome enforce(const Metapolicy& m, std::uint32_t policy_id, const AccessContext& context,
                               const EvaluatorRegistry& evaluators);

    PolicyCache& cache() noexcept { return *cache_; }
    ReportSink& reports() noexcept { return *sink_; }
    const trust::TrustConfig& trust_config() const noexcept { return cfg_; }
    ResolverPort& resolver() noexcept { return *resolver_; }

private:
    Metapolicy fetch_and_verify(const DomainName& domain);
    std::shared_ptr<std::mutex> domain_lock(const DomainName& domain);
    void warn(const std::string& message) const;

    std::shared_ptr<ResolverPort> resolver_;
    trust::TrustConfig cfg_;
    std::shared_ptr<PolicyCache> cache_;
    std::shared_ptr<ReportSink> sink_;
    AgentOptions options_;

    std::mutex locks_mutex_;
    std::map<DomainName, std::shared_ptr<std::mutex>> locks_;
};

// Fetches every part of `domain`'s metapolicy (parts 2..n concurrently) and
// returns the reassembled text, unverified. ResolutionError when part 1 is
// absent or a query fails; HardFailure when the records do not decode.
std::string fetch_published(const DomainName& domain, ResolverPort& resolver, std::uint32_t max_parts = 256);

// One-shot form of Agent::lookup.
Metapolicy lookup(const DomainName& domain, std::shared_ptr<ResolverPort> resolver, std::shared_ptr<PolicyCache> cache,
                  const trust::TrustConfig& cfg);

} // namespace metapolicy
