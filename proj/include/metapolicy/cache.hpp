#pragma once

#include "metapolicy/model.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <vector>

namespace metapolicy {

struct CacheEntry
{
    Metapolicy metapolicy;
    std::chrono::sys_seconds stored_at{};
    bool stale = false;
};

// Verified metapolicies by domain. Concurrent readers, serialized writers.
//
// With a snapshot path every successful write rewrites the snapshot file
// (write to a temporary, then rename), so the cache survives restarts.
class PolicyCache
{
public:
    PolicyCache() = default;
    explicit PolicyCache(std::filesystem::path snapshot);

    std::optional<CacheEntry> get(const DomainName& domain) const;

    // Refuses (returns false) to replace version v with anything below v.
    // The same version is accepted only for an identical metapolicy, which
    // lets callers update the stale flag.
    bool put(const CacheEntry& entry);
    void erase(const DomainName& domain);

    std::vector<DomainName> domains() const;
    std::size_t size() const;

    const std::optional<std::filesystem::path>& snapshot_path() const noexcept { return path_; }

private:
    void load();
    void save_locked() const;

    mutable std::shared_mutex mutex_;
    std::map<DomainName, CacheEntry> entries_;
    std::optional<std::filesystem::path> path_;
};

// Snapshot format, version 1:
//   metapolicy-cache 1
//   entry <domain> <stored_at unix seconds> <0|1 stale> <byte count>
//   <canonical bytes>
std::string serialize_snapshot(const std::map<DomainName, CacheEntry>& entries);
std::map<DomainName, CacheEntry> parse_snapshot(std::string_view text);

} // namespace metapolicy
