#pragma once

#include "metapolicy/model.hpp"

#include <functional>
#include <map>
#include <string>

namespace metapolicy {

class ResolverPort;

// What an evaluator gets to look at for one access.
//
// Attributes used by the bundled evaluators:
//   ip         client / sender address (SPF)
//   ca_domain  issuer domain of the presented certificate (CAA)
//   scheme     URL scheme of the access (HTTPS-required)
struct AccessContext
{
    DomainName domain;
    std::map<std::string, std::string> attributes;
    ResolverPort* resolver = nullptr;

    std::string attribute(const std::string& key) const;
};

struct Evaluation
{
    bool passed = false;
    std::string detail;
};

using Evaluator = std::function<Evaluation(const PolicyEntry&, const AccessContext&)>;

class EvaluatorRegistry
{
public:
    void add(std::uint32_t policy_id, Evaluator evaluator);
    const Evaluator* find(std::uint32_t policy_id) const;

    // SPF (7208, and 7288 as written in the published example), CAA (6844,
    // 8659) and HTTPS-required (6797).
    static EvaluatorRegistry with_defaults();

private:
    std::map<std::uint32_t, Evaluator> evaluators_;
};

namespace spf {

enum class Result { pass, fail, softfail, neutral, none, permerror, temperror };

std::string_view to_string(Result r) noexcept;

// check_host() subset: all, ip4, ip6, a, include and redirect, with the
// ten-lookup limit. `mx`, `ptr` and `exists` never match.
Result check_host(std::string_view record, const std::string& ip, const DomainName& domain, ResolverPort* resolver);

} // namespace spf

bool ip_in_network(const std::string& ip, const std::string& network);

Evaluation evaluate_spf(const PolicyEntry& policy, const AccessContext& ctx);
// Specification: CAA properties in presentation form, e.g.
//   0 issue "letsencrypt.org" 0 iodef "mailto:ca@a.com"
Evaluation evaluate_caa(const PolicyEntry& policy, const AccessContext& ctx);
Evaluation evaluate_https_required(const PolicyEntry& policy, const AccessContext& ctx);

} // namespace metapolicy
