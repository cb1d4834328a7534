#include "metapolicy/reports.hpp"

#include "metapolicy/errors.hpp"

#include <json.hpp>

namespace metapolicy {

std::string to_json_line(const ReportEvent& event)
{
    nlohmann::ordered_json j;
    j["domain"] = event.domain.str();
    j["policy_id"] = event.policy_id;
    j["failure_reason"] = event.failure_reason;
    j["addresses"] = event.addresses;
    j["timestamp"] = event.timestamp.time_since_epoch().count();
    return j.dump();
}

ReportEvent report_from_json_line(std::string_view line)
{
    try {
        auto j = nlohmann::json::parse(line);
        ReportEvent e;
        e.domain = DomainName::parse(j.at("domain").get<std::string>());
        e.policy_id = j.at("policy_id").get<std::uint32_t>();
        e.failure_reason = j.at("failure_reason").get<std::string>();
        e.addresses = j.at("addresses").get<std::vector<std::string>>();
        e.timestamp = std::chrono::sys_seconds(std::chrono::seconds(j.at("timestamp").get<std::int64_t>()));
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("bad report line: ") + ex.what());
    }
}

void MemoryReportSink::emit(const ReportEvent& event)
{
    std::lock_guard lock(mutex_);
    events_.push_back(event);
}

std::vector<ReportEvent> MemoryReportSink::events() const
{
    std::lock_guard lock(mutex_);
    return events_;
}

void MemoryReportSink::clear()
{
    std::lock_guard lock(mutex_);
    events_.clear();
}

JsonLinesReportSink::JsonLinesReportSink(const std::filesystem::path& path)
    : out_(path, std::ios::app)
{
    if (!out_)
        throw ConfigError("cannot open report log " + path.string());
}

void JsonLinesReportSink::emit(const ReportEvent& event)
{
    std::lock_guard lock(mutex_);
    out_ << to_json_line(event) << '\n';
    out_.flush();
}

} // namespace metapolicy
