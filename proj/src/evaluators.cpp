#include "metapolicy/evaluators.hpp"

#include "metapolicy/errors.hpp"
#include "metapolicy/resolver.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstring>
#include <optional>
#include <sstream>

namespace metapolicy {

std::string AccessContext::attribute(const std::string& key) const
{
    auto it = attributes.find(key);
    return it == attributes.end() ? std::string{} : it->second;
}

void EvaluatorRegistry::add(std::uint32_t policy_id, Evaluator evaluator)
{
    evaluators_[policy_id] = std::move(evaluator);
}

const Evaluator* EvaluatorRegistry::find(std::uint32_t policy_id) const
{
    auto it = evaluators_.find(policy_id);
    return it == evaluators_.end() ? nullptr : &it->second;
}

EvaluatorRegistry EvaluatorRegistry::with_defaults()
{
    EvaluatorRegistry r;
    r.add(7208, evaluate_spf);
    r.add(7288, evaluate_spf);
    r.add(6844, evaluate_caa);
    r.add(8659, evaluate_caa);
    r.add(6797, evaluate_https_required);
    return r;
}

namespace {

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

struct RawAddress
{
    int family = 0;
    std::array<std::uint8_t, 16> bytes{};
    unsigned bits() const { return family == AF_INET ? 32 : 128; }
};

std::optional<RawAddress> parse_address(const std::string& text)
{
    RawAddress a;
    if (::inet_pton(AF_INET, text.c_str(), a.bytes.data()) == 1) {
        a.family = AF_INET;
        return a;
    }
    if (::inet_pton(AF_INET6, text.c_str(), a.bytes.data()) == 1) {
        a.family = AF_INET6;
        return a;
    }
    return std::nullopt;
}

bool prefix_equal(const RawAddress& a, const RawAddress& b, unsigned prefix)
{
    for (unsigned i = 0; i < prefix; ++i) {
        unsigned byte = i / 8, bit = 7 - i % 8;
        if (((a.bytes[byte] >> bit) & 1) != ((b.bytes[byte] >> bit) & 1))
            return false;
    }
    return true;
}

std::optional<unsigned> parse_prefix(std::string_view s)
{
    unsigned v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size())
        return std::nullopt;
    return v;
}

} // namespace

bool ip_in_network(const std::string& ip, const std::string& network)
{
    auto slash = network.find('/');
    auto addr = parse_address(ip);
    auto net = parse_address(network.substr(0, slash));
    if (!addr || !net || addr->family != net->family)
        return false;
    unsigned prefix = net->bits();
    if (slash != std::string::npos) {
        auto p = parse_prefix(std::string_view(network).substr(slash + 1));
        if (!p || *p > net->bits())
            return false;
        prefix = *p;
    }
    return prefix_equal(*addr, *net, prefix);
}

namespace spf {

std::string_view to_string(Result r) noexcept
{
    switch (r) {
    case Result::pass: return "pass";
    case Result::fail: return "fail";
    case Result::softfail: return "softfail";
    case Result::neutral: return "neutral";
    case Result::none: return "none";
    case Result::permerror: return "permerror";
    case Result::temperror: return "temperror";
    }
    return "permerror";
}

namespace {

constexpr int lookup_limit = 10;

bool is_spf_record(std::string_view text)
{
    auto l = lower(text.substr(0, 7));
    return l == "v=spf1" || l == "v=spf1 ";
}

struct Fetched
{
    Result error = Result::none;
    std::string record;
};

Fetched fetch_record(const std::string& name, ResolverPort* resolver)
{
    if (!resolver)
        return {Result::temperror, {}};
    auto domain = DomainName::try_parse(name);
    if (!domain)
        return {Result::permerror, {}};
    std::vector<std::string> found;
    try {
        for (const auto& strings : resolver->query_txt(*domain)) {
            auto text = dns::join(strings);
            if (is_spf_record(text))
                found.push_back(text);
        }
    } catch (const ResolutionError&) {
        return {Result::temperror, {}};
    } catch (const dns::WireError&) {
        return {Result::temperror, {}};
    }
    if (found.empty())
        return {Result::none, {}};
    if (found.size() > 1)
        return {Result::permerror, {}};
    return {Result::pass, found.front()};
}

Result qualifier_result(char q)
{
    switch (q) {
    case '-': return Result::fail;
    case '~': return Result::softfail;
    case '?': return Result::neutral;
    default: return Result::pass;
    }
}

Result evaluate(std::string_view record, const std::string& ip, const DomainName& domain, ResolverPort* resolver,
                int& lookups);

Result evaluate_named(const std::string& target, const std::string& ip, ResolverPort* resolver, int& lookups,
                      bool for_redirect)
{
    auto fetched = fetch_record(target, resolver);
    if (fetched.error == Result::none)
        return for_redirect ? Result::permerror : Result::none;
    if (fetched.error != Result::pass)
        return fetched.error;
    return evaluate(fetched.record, ip, DomainName::parse(target), resolver, lookups);
}

Result evaluate(std::string_view record, const std::string& ip, const DomainName& domain, ResolverPort* resolver,
                int& lookups)
{
    std::istringstream in{std::string(record)};
    std::string term;
    in >> term;
    if (lower(term) != "v=spf1")
        return Result::permerror;

    std::optional<std::string> redirect;
    while (in >> term) {
        auto lterm = lower(term);
        if (lterm.starts_with("redirect=")) {
            redirect = term.substr(9);
            continue;
        }
        char qualifier = '+';
        if (std::strchr("+-~?", lterm[0])) {
            qualifier = lterm[0];
            lterm.erase(0, 1);
            term.erase(0, 1);
        }
        auto split = lterm.find_first_of(":/");
        auto name = lterm.substr(0, split);
        if (lterm.find('=') != std::string::npos && split == std::string::npos)
            continue; // unknown modifier
        std::string arg = split == std::string::npos ? "" : term.substr(split + (term[split] == ':' ? 1 : 0));

        bool matched = false;
        if (name == "all") {
            matched = true;
        } else if (name == "ip4" || name == "ip6") {
            matched = ip_in_network(ip, arg);
        } else if (name == "a") {
            if (++lookups > lookup_limit)
                return Result::permerror;
            std::string target = domain.str();
            std::string cidr = "32";
            auto slash = arg.find('/');
            if (!arg.empty() && arg[0] != '/')
                target = arg.substr(0, slash);
            if (slash != std::string::npos)
                cidr = arg.substr(slash + 1);
            auto owner = DomainName::try_parse(target);
            if (!owner)
                return Result::permerror;
            if (!resolver)
                return Result::temperror;
            auto answer = resolver->query(*owner, dns::RecordType::A);
            if (answer.status == QueryStatus::servfail || answer.status == QueryStatus::timeout)
                return Result::temperror;
            for (const auto& rdata : answer.rdatas)
                if (ip_in_network(ip, dns::decode_a(rdata) + "/" + cidr))
                    matched = true;
        } else if (name == "include") {
            if (++lookups > lookup_limit)
                return Result::permerror;
            auto r = evaluate_named(arg, ip, resolver, lookups, false);
            if (r == Result::temperror)
                return r;
            if (r == Result::permerror || r == Result::none)
                return Result::permerror;
            matched = r == Result::pass;
        } else if (name == "mx" || name == "ptr" || name == "exists") {
            if (++lookups > lookup_limit)
                return Result::permerror;
        } else {
            return Result::permerror;
        }
        if (matched)
            return qualifier_result(qualifier);
    }

    if (redirect) {
        if (++lookups > lookup_limit)
            return Result::permerror;
        return evaluate_named(*redirect, ip, resolver, lookups, true);
    }
    return Result::neutral;
}

} // namespace

Result check_host(std::string_view record, const std::string& ip, const DomainName& domain, ResolverPort* resolver)
{
    int lookups = 0;
    return evaluate(record, ip, domain, resolver, lookups);
}

} // namespace spf

Evaluation evaluate_spf(const PolicyEntry& policy, const AccessContext& ctx)
{
    auto ip = ctx.attribute("ip");
    if (ip.empty())
        return {false, "no sender ip in context"};
    auto r = spf::check_host(policy.specification, ip, ctx.domain, ctx.resolver);
    return {r == spf::Result::pass, "spf " + std::string(spf::to_string(r)) + " for " + ip};
}

namespace {

std::vector<std::string> tokenize_quoted(std::string_view s)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
            continue;
        }
        std::string tok;
        if (s[i] == '"') {
            ++i;
            while (i < s.size() && s[i] != '"') {
                if (s[i] == '\\' && i + 1 < s.size())
                    ++i;
                tok += s[i++];
            }
            ++i;
        } else {
            while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])))
                tok += s[i++];
        }
        out.push_back(std::move(tok));
    }
    return out;
}

std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos)
        return {};
    auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace

Evaluation evaluate_caa(const PolicyEntry& policy, const AccessContext& ctx)
{
    auto tokens = tokenize_quoted(policy.specification);
    if (tokens.size() % 3 != 0)
        return {false, "malformed CAA specification"};
    bool wildcard = ctx.attribute("wildcard") == "true";
    auto tag_wanted = wildcard ? "issuewild" : "issue";

    std::vector<std::string> issuers;
    bool any_issue = false, any_issuewild = false;
    std::vector<std::string> plain_issuers;
    for (std::size_t i = 0; i < tokens.size(); i += 3) {
        auto tag = lower(tokens[i + 1]);
        auto issuer = lower(trim(tokens[i + 2].substr(0, tokens[i + 2].find(';'))));
        if (tag == "issue") {
            any_issue = true;
            plain_issuers.push_back(issuer);
        }
        if (tag == "issuewild") {
            any_issuewild = true;
            if (wildcard)
                issuers.push_back(issuer);
        }
    }
    // issuewild falls back to issue when absent.
    if (!wildcard || !any_issuewild)
        issuers = plain_issuers;
    if (!any_issue && !(wildcard && any_issuewild))
        return {true, "no issuer restriction"};

    auto ca = lower(ctx.attribute("ca_domain"));
    if (ca.empty())
        return {false, "no ca_domain in context"};
    for (const auto& issuer : issuers)
        if (!issuer.empty() && issuer == ca)
            return {true, ca + " authorised by " + tag_wanted};
    return {false, ca + " not authorised to issue"};
}

Evaluation evaluate_https_required(const PolicyEntry&, const AccessContext& ctx)
{
    auto scheme = lower(ctx.attribute("scheme"));
    if (scheme == "https")
        return {true, "https"};
    return {false, scheme.empty() ? "no scheme in context" : "scheme " + scheme + " is not https"};
}

} // namespace metapolicy
