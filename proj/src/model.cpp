#include "metapolicy/model.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

namespace metapolicy {

namespace chr = std::chrono;

bool ValidityWindow::contains(chr::sys_days day) const noexcept
{
    return chr::sys_days(valid_from) <= day && day <= chr::sys_days(valid_to);
}

bool ValidityWindow::expired_at(chr::sys_days day) const noexcept
{
    return day > chr::sys_days(valid_to);
}

std::string format_date(chr::year_month_day date)
{
    return fmt::format("{:02}/{:02}/{:04}", static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                       static_cast<int>(date.year()));
}

namespace {

std::optional<unsigned> parse_digits(std::string_view text, std::size_t min_len, std::size_t max_len)
{
    if (text.size() < min_len || text.size() > max_len)
        return std::nullopt;
    unsigned value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size())
        return std::nullopt;
    return value;
}

} // namespace

std::optional<chr::year_month_day> parse_date(std::string_view text)
{
    auto first = text.find('/');
    auto second = first == std::string_view::npos ? first : text.find('/', first + 1);
    if (second == std::string_view::npos)
        return std::nullopt;
    auto month = parse_digits(text.substr(0, first), 1, 2);
    auto day = parse_digits(text.substr(first + 1, second - first - 1), 1, 2);
    auto year = parse_digits(text.substr(second + 1), 4, 4);
    if (!month || !day || !year)
        return std::nullopt;
    chr::year_month_day date{chr::year{static_cast<int>(*year)}, chr::month{*month}, chr::day{*day}};
    if (!date.ok())
        return std::nullopt;
    return date;
}

std::string_view to_string(FailMode mode) noexcept
{
    switch (mode) {
    case FailMode::hard: return "hard";
    case FailMode::soft: return "soft";
    case FailMode::ignore: return "ignore";
    }
    return "hard";
}

std::optional<FailMode> parse_fail_mode(std::string_view token) noexcept
{
    if (token == "hard")
        return FailMode::hard;
    if (token == "soft")
        return FailMode::soft;
    if (token == "ignore")
        return FailMode::ignore;
    return std::nullopt;
}

std::string_view to_string(SignatureAlgorithm alg) noexcept
{
    switch (alg) {
    case SignatureAlgorithm::rsa_pkcs1_sha256: return "rsa-pkcs1-sha256";
    case SignatureAlgorithm::ecdsa_p256_sha256: return "ecdsa-p256-sha256";
    case SignatureAlgorithm::ed25519: return "ed25519";
    }
    return "ed25519";
}

std::optional<SignatureAlgorithm> parse_signature_algorithm(std::string_view token) noexcept
{
    for (auto alg : {SignatureAlgorithm::rsa_pkcs1_sha256, SignatureAlgorithm::ecdsa_p256_sha256,
                     SignatureAlgorithm::ed25519}) {
        if (token == to_string(alg))
            return alg;
    }
    return std::nullopt;
}

namespace {

template <typename Range>
const PolicyEntry* find_by_id(const Range& policies, std::uint32_t id) noexcept
{
    auto it = std::find_if(policies.begin(), policies.end(), [id](const PolicyEntry& p) { return p.id == id; });
    return it == policies.end() ? nullptr : &*it;
}

} // namespace

const PolicyEntry* Draft::find_policy(std::uint32_t id) const noexcept
{
    return find_by_id(policies, id);
}

const PolicyEntry* Metapolicy::find_policy(std::uint32_t id) const noexcept
{
    return find_by_id(policies, id);
}

} // namespace metapolicy
