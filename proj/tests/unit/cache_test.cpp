#include "support.hpp"

#include "metapolicy/cache.hpp"
#include "metapolicy/reports.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <fstream>
#include <random>
#include <thread>

namespace mp = metapolicy;
namespace fs = std::filesystem;
namespace chr = std::chrono;

namespace {

mp::CacheEntry entry(const std::string& domain, std::uint32_t version, std::size_t filler = 0)
{
    auto d = support::sized_draft(mp::DomainName::parse(domain), version, filler);
    mp::Metapolicy m{d.header, d.policies, {mp::SignatureAlgorithm::ed25519, mp::Bytes(64, 9)}, {}};
    mp::fixtures::fit_parts(m);
    return {m, chr::sys_seconds(chr::seconds(1700000000 + version)), false};
}

class TempDir
{
public:
    TempDir()
    {
        path_ = fs::temp_directory_path() /
                ("metapolicy-test-" + std::to_string(std::random_device{}()) + std::to_string(::getpid()));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

} // namespace

TEST(Cache, VersionsOnlyMoveForward)
{
    mp::PolicyCache cache;
    auto a = mp::DomainName::parse("a.com");
    EXPECT_TRUE(cache.put(entry("a.com", 3)));
    EXPECT_FALSE(cache.put(entry("a.com", 2)));
    EXPECT_EQ(cache.get(a)->metapolicy.header.version, 3u);
    EXPECT_TRUE(cache.put(entry("a.com", 4)));
    EXPECT_EQ(cache.get(a)->metapolicy.header.version, 4u);

    // Same version: only the identical metapolicy (e.g. to flip the stale flag).
    auto same = entry("a.com", 4);
    same.stale = true;
    EXPECT_TRUE(cache.put(same));
    EXPECT_TRUE(cache.get(a)->stale);
    EXPECT_FALSE(cache.put(entry("a.com", 4, 100)));

    cache.erase(a);
    EXPECT_FALSE(cache.get(a));
    EXPECT_EQ(cache.size(), 0u);
}

TEST(Cache, SnapshotSurvivesRestart)
{
    TempDir dir;
    auto path = dir.path() / "cache.snapshot";
    {
        mp::PolicyCache cache(path);
        cache.put(entry("a.com", 2, 900));
        auto b = entry("b.org", 7);
        b.stale = true;
        cache.put(b);
    }
    mp::PolicyCache reopened(path);
    EXPECT_EQ(reopened.size(), 2u);
    auto a = reopened.get(mp::DomainName::parse("a.com"));
    ASSERT_TRUE(a);
    EXPECT_EQ(a->metapolicy, entry("a.com", 2, 900).metapolicy);
    EXPECT_EQ(a->stored_at, entry("a.com", 2).stored_at);
    EXPECT_FALSE(a->stale);
    EXPECT_TRUE(reopened.get(mp::DomainName::parse("b.org"))->stale);
    EXPECT_FALSE(reopened.put(entry("a.com", 1)));
    EXPECT_FALSE(fs::exists(path.string() + ".tmp"));
}

TEST(Cache, SnapshotTextFormat)
{
    std::map<mp::DomainName, mp::CacheEntry> entries;
    auto e = entry("a.com", 1);
    entries[e.metapolicy.header.domain] = e;
    auto text = mp::serialize_snapshot(entries);
    auto canonical = mp::canonical_serialize(e.metapolicy);
    auto expected = "metapolicy-cache 1\nentry a.com " + std::to_string(e.stored_at.time_since_epoch().count()) +
                    " 0 " + std::to_string(canonical.size()) + "\n" + canonical + "\n";
    EXPECT_EQ(text, expected);
    auto back = mp::parse_snapshot(text);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back.begin()->second.metapolicy, e.metapolicy);

    EXPECT_THROW(mp::parse_snapshot("metapolicy-cache 2\n"), mp::ConfigError);
    EXPECT_THROW(mp::parse_snapshot(text.substr(0, text.size() - 40)), mp::ConfigError);
}

TEST(Cache, ConcurrentWritersKeepTheHighestVersion)
{
    mp::PolicyCache cache;
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t)
        threads.emplace_back([&, t] {
            for (std::uint32_t v = 1; v <= 40; ++v)
                cache.put(entry("race.example", (v * 7 + t) % 40 + 1));
        });
    for (auto& t : threads)
        t.join();
    EXPECT_EQ(cache.get(mp::DomainName::parse("race.example"))->metapolicy.header.version, 40u);
}

TEST(Reports, JsonLineFields)
{
    mp::ReportEvent e{mp::DomainName::parse("a.com"), 7208, "spf: softfail", {"r@a.com", "s@a.com"},
                      chr::sys_seconds(chr::seconds(1500000000))};
    auto line = mp::to_json_line(e);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["domain"], "a.com");
    EXPECT_EQ(j["policy_id"], 7208);
    EXPECT_EQ(j["failure_reason"], "spf: softfail");
    EXPECT_EQ(j["addresses"].size(), 2u);
    EXPECT_EQ(j["timestamp"], 1500000000);
    EXPECT_EQ(mp::report_from_json_line(line), e);
    EXPECT_THROW(mp::report_from_json_line("{\"domain\": 1}"), mp::ConfigError);
}

TEST(Reports, SinksCollectEvents)
{
    TempDir dir;
    auto path = dir.path() / "reports.jsonl";
    mp::ReportEvent e{mp::DomainName::parse("a.com"), 0, "stale", {}, chr::sys_seconds(chr::seconds(5))};
    {
        mp::JsonLinesReportSink sink(path);
        sink.emit(e);
        sink.emit(e);
    }
    std::ifstream in(path);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        EXPECT_EQ(mp::report_from_json_line(line), e);
        ++n;
    }
    EXPECT_EQ(n, 2);

    mp::MemoryReportSink memory;
    memory.emit(e);
    EXPECT_EQ(memory.events().size(), 1u);
    memory.clear();
    EXPECT_TRUE(memory.events().empty());
}
