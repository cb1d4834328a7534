#include "metapolicy/cache.hpp"

#include "metapolicy/canonical.hpp"
#include "metapolicy/crypto.hpp"
#include "metapolicy/errors.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <mutex>
#include <sstream>

namespace metapolicy {

namespace {

constexpr std::string_view snapshot_magic = "metapolicy-cache 1";

std::int64_t to_int(std::string_view s)
{
    std::int64_t v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size())
        throw ConfigError("cache snapshot: bad number '" + std::string(s) + "'");
    return v;
}

} // namespace

std::string serialize_snapshot(const std::map<DomainName, CacheEntry>& entries)
{
    std::string out(snapshot_magic);
    out += '\n';
    for (const auto& [domain, entry] : entries) {
        auto body = canonical_serialize(entry.metapolicy);
        out += fmt::format("entry {} {} {} {}\n", domain.str(), entry.stored_at.time_since_epoch().count(),
                           entry.stale ? 1 : 0, body.size());
        out += body;
        out += '\n';
    }
    return out;
}

std::map<DomainName, CacheEntry> parse_snapshot(std::string_view text)
{
    auto eol = text.find('\n');
    if (eol == std::string_view::npos || text.substr(0, eol) != snapshot_magic)
        throw ConfigError("cache snapshot: unknown format");
    std::size_t pos = eol + 1;

    std::map<DomainName, CacheEntry> out;
    while (pos < text.size()) {
        eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
            throw ConfigError("cache snapshot: truncated entry line");
        std::istringstream line{std::string(text.substr(pos, eol - pos))};
        std::string tag, domain, stored, stale, length;
        line >> tag >> domain >> stored >> stale >> length;
        if (tag != "entry" || length.empty())
            throw ConfigError("cache snapshot: bad entry line");
        auto n = static_cast<std::size_t>(to_int(length));
        pos = eol + 1;
        if (pos + n + 1 > text.size() || text[pos + n] != '\n')
            throw ConfigError("cache snapshot: truncated entry for " + domain);

        CacheEntry entry;
        try {
            entry.metapolicy = parse(text.substr(pos, n));
        } catch (const ParseError& e) {
            throw ConfigError("cache snapshot: entry for " + domain + ": " + e.what());
        }
        entry.stored_at = std::chrono::sys_seconds(std::chrono::seconds(to_int(stored)));
        entry.stale = stale == "1";
        out[DomainName::parse(domain)] = std::move(entry);
        pos += n + 1;
    }
    return out;
}

PolicyCache::PolicyCache(std::filesystem::path snapshot) : path_(std::move(snapshot))
{
    load();
}

void PolicyCache::load()
{
    if (!path_ || !std::filesystem::exists(*path_))
        return;
    entries_ = parse_snapshot(read_file(*path_));
}

void PolicyCache::save_locked() const
{
    if (!path_)
        return;
    if (path_->has_parent_path())
        std::filesystem::create_directories(path_->parent_path());
    auto tmp = *path_;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw ConfigError("cannot write cache snapshot " + tmp.string());
        out << serialize_snapshot(entries_);
        if (!out)
            throw ConfigError("cannot write cache snapshot " + tmp.string());
    }
    std::filesystem::rename(tmp, *path_);
}

std::optional<CacheEntry> PolicyCache::get(const DomainName& domain) const
{
    std::shared_lock lock(mutex_);
    auto it = entries_.find(domain);
    if (it == entries_.end())
        return std::nullopt;
    return it->second;
}

bool PolicyCache::put(const CacheEntry& entry)
{
    std::unique_lock lock(mutex_);
    const auto& domain = entry.metapolicy.header.domain;
    auto it = entries_.find(domain);
    if (it != entries_.end()) {
        auto have = it->second.metapolicy.header.version;
        auto want = entry.metapolicy.header.version;
        if (want < have || (want == have && !(entry.metapolicy == it->second.metapolicy)))
            return false;
    }
    entries_[domain] = entry;
    save_locked();
    return true;
}

void PolicyCache::erase(const DomainName& domain)
{
    std::unique_lock lock(mutex_);
    if (entries_.erase(domain))
        save_locked();
}

std::vector<DomainName> PolicyCache::domains() const
{
    std::shared_lock lock(mutex_);
    std::vector<DomainName> out;
    for (const auto& [d, _] : entries_)
        out.push_back(d);
    return out;
}

std::size_t PolicyCache::size() const
{
    std::shared_lock lock(mutex_);
    return entries_.size();
}

} // namespace metapolicy
