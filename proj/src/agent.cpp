#include "metapolicy/agent.hpp"

#include "metapolicy/canonical.hpp"
#include "metapolicy/codec.hpp"

#include <fmt/format.h>

#include <future>
#include <iostream>
#include <set>

namespace metapolicy {

std::string_view to_string(Decision d) noexcept
{
    switch (d) {
    case Decision::proceed: return "proceed";
    case Decision::warn_and_proceed: return "warn_and_proceed";
    case Decision::terminate: return "terminate";
    }
    return "terminate";
}

std::string_view to_string(EnforcementStatus s) noexcept
{
    switch (s) {
    case EnforcementStatus::passed: return "passed";
    case EnforcementStatus::failed: return "failed";
    case EnforcementStatus::unsupported: return "unsupported";
    case EnforcementStatus::not_present: return "not_present";
    }
    return "failed";
}

Agent::Agent(std::shared_ptr<ResolverPort> resolver, trust::TrustConfig cfg, std::shared_ptr<PolicyCache> cache,
             std::shared_ptr<ReportSink> sink, AgentOptions options)
    : resolver_(std::move(resolver))
    , cfg_(std::move(cfg))
    , cache_(cache ? std::move(cache) : std::make_shared<PolicyCache>())
    , sink_(sink ? std::move(sink) : std::make_shared<MemoryReportSink>())
    , options_(std::move(options))
{
    if (!resolver_)
        throw PreconditionError("agent needs a resolver");
}

void Agent::warn(const std::string& message) const
{
    if (options_.warn)
        options_.warn(message);
    else
        std::cerr << "warning: " << message << '\n';
}

std::shared_ptr<std::mutex> Agent::domain_lock(const DomainName& domain)
{
    std::lock_guard lock(locks_mutex_);
    auto& slot = locks_[domain];
    if (!slot)
        slot = std::make_shared<std::mutex>();
    return slot;
}

namespace {

std::optional<std::string> fetch_part(ResolverPort& resolver, const DomainName& domain, std::uint32_t index)
{
    auto records = resolver.query_txt(codec::owner_name_for_part(index, domain));
    if (records.empty())
        return std::nullopt;
    if (index == 1) {
        for (const auto& r : records) {
            auto text = dns::join(r);
            if (text.starts_with("Header:"))
                return text;
        }
    }
    return dns::join(records.front());
}

std::optional<HeaderPrefix> published_prefix(ResolverPort& resolver, const DomainName& domain)
{
    try {
        if (auto first = fetch_part(resolver, domain, 1))
            return parse_header_prefix(*first);
    } catch (const ResolutionError&) {
    } catch (const ParseError&) {
    } catch (const dns::WireError&) {
    }
    return std::nullopt;
}

} // namespace

std::string fetch_published(const DomainName& domain, ResolverPort& resolver, std::uint32_t max_parts)
{
    auto first = fetch_part(resolver, domain, 1);
    if (!first)
        throw ResolutionError(true, "no metapolicy published for " + domain.str());

    HeaderPrefix prefix;
    try {
        prefix = parse_header_prefix(*first);
    } catch (const ParseError& e) {
        throw HardFailure(fmt::format("part 1 for {} is malformed: {}", domain.str(), e.what()));
    }
    if (prefix.parts > max_parts)
        throw HardFailure(fmt::format("{} declares {} parts (limit {})", domain.str(), prefix.parts, max_parts));

    codec::TxtRecordSet set{domain, {}};
    set.parts.push_back({1, codec::owner_name_for_part(1, domain), *first});

    std::vector<std::future<std::optional<std::string>>> pending;
    for (std::uint32_t i = 2; i <= prefix.parts; ++i)
        pending.push_back(
            std::async(std::launch::async, [&resolver, &domain, i] { return fetch_part(resolver, domain, i); }));
    std::optional<std::uint32_t> missing;
    std::exception_ptr transport_error;
    for (std::uint32_t i = 2; i <= prefix.parts; ++i) {
        try {
            auto payload = pending[i - 2].get();
            if (!payload) {
                missing = missing.value_or(i);
                continue;
            }
            set.parts.push_back({i, codec::owner_name_for_part(i, domain), std::move(*payload)});
        } catch (...) {
            if (!transport_error)
                transport_error = std::current_exception();
        }
    }
    if (transport_error)
        std::rethrow_exception(transport_error);
    if (missing)
        throw HardFailure(fmt::format("part {} of {} for {} is missing", *missing, prefix.parts, domain.str()));

    try {
        return codec::reassemble(set);
    } catch (const CodecError& e) {
        throw HardFailure(fmt::format("cannot reassemble metapolicy for {}: {}", domain.str(), e.what()));
    }
}

Metapolicy Agent::fetch_and_verify(const DomainName& domain)
{
    auto text = fetch_published(domain, *resolver_, options_.max_parts);
    Metapolicy m;
    try {
        m = parse(text);
    } catch (const ParseError& e) {
        throw HardFailure(fmt::format("cannot parse metapolicy for {}: {}", domain.str(), e.what()));
    }
    if (m.header.domain != domain)
        throw HardFailure(fmt::format("metapolicy at {} names domain {}", domain.str(), m.header.domain.str()),
                          trust::VerificationStatus::domain_mismatch);

    auto result = trust::verify(m, cfg_, resolver_.get());
    if (!result.valid())
        throw HardFailure(fmt::format("verification of {} failed: {} ({})", domain.str(),
                                      trust::to_string(result.status), result.details),
                          result.status);
    return m;
}

Metapolicy Agent::lookup(const DomainName& domain)
{
    if (auto cached = cache_->get(domain)) {
        auto published = published_prefix(*resolver_, domain);
        // Stripped, garbled or foreign records never displace a verified copy.
        const auto& have = cached->metapolicy.header;
        if (!published || published->domain != domain || published->version <= have.version) {
            if (published && published->domain == domain && published->version == have.version &&
                (published->validity != have.validity || published->parts != have.parts))
                warn(fmt::format("{}: published version {} differs from the cached copy in its header", domain.str(),
                                 have.version));
            return cached->metapolicy;
        }

        auto lock = domain_lock(domain);
        std::lock_guard guard(*lock);
        if (auto again = cache_->get(domain); again && again->metapolicy.header.version >= published->version)
            return again->metapolicy;
        auto fresh = fetch_and_verify(domain);
        if (fresh.header.version <= have.version)
            return cached->metapolicy;
        cache_->put({fresh, cfg_.now(), false});
        return fresh;
    }

    auto lock = domain_lock(domain);
    std::lock_guard guard(*lock);
    if (auto again = cache_->get(domain))
        return again->metapolicy;
    auto fresh = fetch_and_verify(domain);
    cache_->put({fresh, cfg_.now(), false});
    return fresh;
}

std::optional<Metapolicy> Agent::lookup_for_subdomain(const DomainName& sub)
{
    try {
        return lookup(sub);
    } catch (const ResolutionError& e) {
        if (!e.absent())
            throw;
    }
    for (auto ancestor = sub.parent(); ancestor.labels().size() >= 2; ancestor = ancestor.parent()) {
        Metapolicy m;
        try {
            m = lookup(ancestor);
        } catch (const ResolutionError& e) {
            if (!e.absent())
                throw;
            continue;
        }
        for (const auto& pattern : m.header.subdomains)
            if (pattern.matches(sub, options_.wildcard_mode))
                return m;
        return std::nullopt;
    }
    return std::nullopt;
}

namespace {

std::vector<std::string> all_report_addresses(const Metapolicy& m)
{
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& p : m.policies)
        for (const auto& a : p.fail.report_addresses)
            if (seen.insert(a).second)
                out.push_back(a);
    return out;
}

} // namespace

ExpiryOutcome Agent::handle_expiry(const CacheEntry& entry)
{
    const auto& header = entry.metapolicy.header;
    if (!header.validity.expired_at(cfg_.today()))
        throw PreconditionError(fmt::format("metapolicy for {} is valid until {}", header.domain.str(),
                                            format_date(header.validity.valid_to)));

    auto published = published_prefix(*resolver_, header.domain);

    if (published && published->domain == header.domain && published->version > header.version) {
        auto lock = domain_lock(header.domain);
        std::lock_guard guard(*lock);
        auto fresh = fetch_and_verify(header.domain);
        if (fresh.header.version > header.version) {
            CacheEntry next{fresh, cfg_.now(), false};
            cache_->put(next);
            return {next, std::nullopt};
        }
    }

    CacheEntry stale = entry;
    stale.stale = true;
    cache_->put(stale);
    ReportEvent report{header.domain, 0,
                       fmt::format("stale metapolicy: version {} expired {}, no newer version published",
                                   header.version, format_date(header.validity.valid_to)),
                       all_report_addresses(entry.metapolicy), cfg_.now()};
    sink_->emit(report);
    return {stale, report};
}

EnforcementOutcome Agent::enforce(const Metapolicy& m, std::uint32_t policy_id, const AccessContext& context,
                                  const EvaluatorRegistry& evaluators)
{
    EnforcementOutcome out;
    out.policy_id = policy_id;
    const auto* policy = m.find_policy(policy_id);
    if (!policy) {
        out.status = EnforcementStatus::not_present;
        out.detail = fmt::format("policy {} is not part of the metapolicy for {}", policy_id, m.header.domain.str());
        return out;
    }

    auto report = [&](std::string reason) {
        ReportEvent e{m.header.domain, policy_id, std::move(reason), policy->fail.report_addresses, cfg_.now()};
        sink_->emit(e);
        out.reports.push_back(std::move(e));
    };

    const auto* evaluator = evaluators.find(policy_id);
    if (!evaluator) {
        out.decision = Decision::warn_and_proceed;
        out.status = EnforcementStatus::unsupported;
        out.detail = fmt::format("no evaluator for policy {}", policy_id);
        report(out.detail);
        return out;
    }

    Evaluation eval;
    try {
        AccessContext ctx = context;
        if (!ctx.resolver)
            ctx.resolver = resolver_.get();
        eval = (*evaluator)(*policy, ctx);
    } catch (const std::exception& e) {
        eval = {false, std::string("evaluator error: ") + e.what()};
    }
    out.detail = eval.detail;
    if (eval.passed)
        return out;

    out.status = EnforcementStatus::failed;
    switch (policy->fail.mode) {
    case FailMode::hard: out.decision = Decision::terminate; break;
    case FailMode::soft: out.decision = Decision::warn_and_proceed; break;
    case FailMode::ignore: out.decision = Decision::proceed; break;
    }
    report(eval.detail);
    return out;
}

Metapolicy lookup(const DomainName& domain, std::shared_ptr<ResolverPort> resolver, std::shared_ptr<PolicyCache> cache,
                  const trust::TrustConfig& cfg)
{
    Agent agent(std::move(resolver), cfg, std::move(cache));
    return agent.lookup(domain);
}

} // namespace metapolicy
