#include "metapolicy/domain_name.hpp"

#include "metapolicy/errors.hpp"

#include <algorithm>

namespace metapolicy {

namespace {

constexpr std::size_t max_name_length = 253;
constexpr std::size_t max_label_length = 63;

char lower(char c) noexcept
{
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool is_ldh(char c) noexcept
{
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
}

// Returns an empty string when the label is acceptable, else the reason.
std::string check_label(std::string_view label)
{
    if (label.empty())
        return "empty label";
    if (label.size() > max_label_length)
        return "label longer than 63 bytes";
    std::size_t start = 0;
    if (label.front() == '_') {
        if (label.size() == 1)
            return "bare underscore label";
        start = 1;
    }
    for (std::size_t i = start; i < label.size(); ++i) {
        if (!is_ldh(label[i]))
            return "invalid character in label '" + std::string(label) + "'";
    }
    if (label[start] == '-' || label.back() == '-')
        return "label '" + std::string(label) + "' starts or ends with a hyphen";
    return {};
}

} // namespace

DomainName DomainName::parse(std::string_view text)
{
    if (!text.empty() && text.back() == '.')
        text.remove_suffix(1);
    if (text.empty())
        throw InvalidName("empty domain name");
    if (text.size() > max_name_length)
        throw InvalidName("domain name longer than 253 bytes");

    std::vector<std::string> labels;
    std::size_t pos = 0;
    while (true) {
        std::size_t dot = text.find('.', pos);
        std::string label;
        for (char c : text.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos))
            label.push_back(lower(c));
        if (auto reason = check_label(label); !reason.empty())
            throw InvalidName(reason + " in '" + std::string(text) + "'");
        labels.push_back(std::move(label));
        if (dot == std::string_view::npos)
            break;
        pos = dot + 1;
    }
    return DomainName(std::move(labels));
}

std::optional<DomainName> DomainName::try_parse(std::string_view text) noexcept
{
    try {
        return parse(text);
    } catch (...) {
        return std::nullopt;
    }
}

std::string DomainName::str() const
{
    std::string out;
    for (const auto& label : labels_) {
        if (!out.empty())
            out.push_back('.');
        out += label;
    }
    return out;
}

std::string DomainName::fqdn() const
{
    return str() + ".";
}

bool DomainName::is_hostname() const noexcept
{
    return !labels_.empty() &&
           std::none_of(labels_.begin(), labels_.end(), [](const std::string& l) { return l.front() == '_'; });
}

bool DomainName::is_subdomain_of(const DomainName& ancestor) const noexcept
{
    if (labels_.size() <= ancestor.labels_.size())
        return false;
    return std::equal(ancestor.labels_.rbegin(), ancestor.labels_.rend(), labels_.rbegin());
}

DomainName DomainName::parent() const
{
    if (labels_.size() <= 1)
        throw InvalidName("'" + str() + "' has no parent");
    return DomainName(std::vector<std::string>(labels_.begin() + 1, labels_.end()));
}

DomainName DomainName::prepend(std::string_view label) const
{
    std::string lowered;
    for (char c : label)
        lowered.push_back(lower(c));
    if (auto reason = check_label(lowered); !reason.empty())
        throw InvalidName(reason);
    std::vector<std::string> labels;
    labels.reserve(labels_.size() + 1);
    labels.push_back(std::move(lowered));
    labels.insert(labels.end(), labels_.begin(), labels_.end());
    DomainName out(std::move(labels));
    if (out.str().size() > max_name_length)
        throw InvalidName("domain name longer than 253 bytes");
    return out;
}

SubdomainPattern SubdomainPattern::parse(std::string_view text)
{
    SubdomainPattern out;
    if (text.starts_with("*.")) {
        out.wildcard = true;
        text.remove_prefix(2);
    } else if (text == "*") {
        throw InvalidName("bare '*' wildcard needs a suffix");
    }
    out.base = DomainName::parse(text);
    return out;
}

std::string SubdomainPattern::str() const
{
    return wildcard ? "*." + base.str() : base.str();
}

bool SubdomainPattern::matches(const DomainName& name, WildcardMode mode) const noexcept
{
    if (!wildcard)
        return name == base;
    if (!name.is_subdomain_of(base))
        return false;
    return mode == WildcardMode::multi_label || name.labels().size() == base.labels().size() + 1;
}

} // namespace metapolicy
