#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace metapolicy {

// A DNS name stored as lowercase labels, most specific first.
//
// Labels are LDH (letters, digits, hyphen; no hyphen at either end). A label
// may also begin with an underscore, which service owner names such as
// `_metapolicy.a.com` or `_443._tcp.a.com` need; is_hostname() tells the two
// apart.
class DomainName
{
public:
    DomainName() = default;

    static DomainName parse(std::string_view text);
    static std::optional<DomainName> try_parse(std::string_view text) noexcept;

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    bool empty() const noexcept { return labels_.empty(); }

    // Presentation form without the trailing dot.
    std::string str() const;
    // Presentation form with the trailing dot, as used in master files.
    std::string fqdn() const;

    bool is_hostname() const noexcept;

    // Strict descendant: "x.a.com" is a subdomain of "a.com", "a.com" is not.
    bool is_subdomain_of(const DomainName& ancestor) const noexcept;

    DomainName parent() const;
    DomainName prepend(std::string_view label) const;

    friend bool operator==(const DomainName&, const DomainName&) = default;
    friend auto operator<=>(const DomainName&, const DomainName&) = default;

private:
    explicit DomainName(std::vector<std::string> labels) : labels_(std::move(labels)) {}

    std::vector<std::string> labels_;
};

enum class WildcardMode { single_label, multi_label };

// One entry of the Header's Subdomains list: a concrete name or `*.suffix`.
struct SubdomainPattern
{
    DomainName base;
    bool wildcard = false;

    static SubdomainPattern parse(std::string_view text);

    std::string str() const;
    bool matches(const DomainName& name, WildcardMode mode = WildcardMode::single_label) const noexcept;

    friend bool operator==(const SubdomainPattern&, const SubdomainPattern&) = default;
};

} // namespace metapolicy
