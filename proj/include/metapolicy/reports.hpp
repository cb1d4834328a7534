#pragma once

#include "metapolicy/domain_name.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

namespace metapolicy {

struct ReportEvent
{
    DomainName domain;
    // 0 when the report concerns the metapolicy as a whole (stale use).
    std::uint32_t policy_id = 0;
    std::string failure_reason;
    std::vector<std::string> addresses;
    std::chrono::sys_seconds timestamp{};

    friend bool operator==(const ReportEvent&, const ReportEvent&) = default;
};

// One JSON object, no trailing newline.
std::string to_json_line(const ReportEvent& event);
ReportEvent report_from_json_line(std::string_view line);

// Where report events go. Delivery to the report addresses is up to whoever
// consumes the sink.
class ReportSink
{
public:
    virtual ~ReportSink() = default;
    virtual void emit(const ReportEvent& event) = 0;
};

class MemoryReportSink final : public ReportSink
{
public:
    void emit(const ReportEvent& event) override;
    std::vector<ReportEvent> events() const;
    void clear();

private:
    mutable std::mutex mutex_;
    std::vector<ReportEvent> events_;
};

// Appends one JSON line per event.
class JsonLinesReportSink final : public ReportSink
{
public:
    explicit JsonLinesReportSink(const std::filesystem::path& path);
    void emit(const ReportEvent& event) override;

private:
    std::mutex mutex_;
    std::ofstream out_;
};

} // namespace metapolicy
