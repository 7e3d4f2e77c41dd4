#include "fleetline/service/event_log.hpp"

#include <fstream>

#include "fleetline/error.hpp"

namespace fleetline::service {

using nlohmann::json;

std::string EventRecord::to_line() const {
  return json{{"seq", seq}, {"ts", ts}, {"kind", kind}, {"payload", payload}}.dump();
}

EventRecord EventRecord::from_line(const std::string& line, std::uint64_t expected_seq) {
  const std::string where = "event log record " + std::to_string(expected_seq);
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception&) {
    fail(ErrorCode::CorruptLog, where + ": not a JSON record");
  }
  if (!j.is_object() || j.size() != 4 || !j.contains("seq") || !j["seq"].is_number_unsigned() ||
      !j.contains("ts") || !j["ts"].is_number_integer() || !j.contains("kind") || !j["kind"].is_string() ||
      !j.contains("payload") || !j["payload"].is_object()) {
    fail(ErrorCode::CorruptLog, where + ": malformed record framing");
  }
  EventRecord r{j["seq"].get<std::uint64_t>(), j["ts"].get<std::int64_t>(), j["kind"].get<std::string>(),
                std::move(j["payload"])};
  if (r.seq != expected_seq) {
    fail(ErrorCode::CorruptLog, where + ": found seq " + std::to_string(r.seq) + " (gap or reorder)");
  }
  return r;
}

EventLog::EventLog(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create data dir " + dir.string() + ": " + ec.message());
  const auto path = dir / kEventLogFile;

  if (std::ifstream in{path, std::ios::binary}) {
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    while (pos < content.size()) {
      const auto nl = content.find('\n', pos);
      if (nl == std::string::npos) {
        fail(ErrorCode::CorruptLog,
             "event log record " + std::to_string(last_seq_ + 1) + ": truncated line without newline");
      }
      loaded_.push_back(EventRecord::from_line(content.substr(pos, nl - pos), last_seq_ + 1));
      last_seq_ = loaded_.back().seq;
      pos = nl + 1;
    }
  }

  file_ = std::fopen(path.c_str(), "ab");
  if (!file_) fail(ErrorCode::IoError, "cannot open " + path.string() + " for append");
}

EventLog::~EventLog() {
  if (file_) std::fclose(file_);
}

EventRecord EventLog::append(std::int64_t ts, std::string kind, nlohmann::json payload) {
  std::lock_guard lock(mutex_);
  EventRecord draft{last_seq_ + 1, ts, std::move(kind), std::move(payload)};
  const std::string line = draft.to_line();
  // Round-trip through the serialized form so callers fold exactly what a
  // later replay will read.
  EventRecord record = EventRecord::from_line(line, draft.seq);
  if (file_) {
    if (std::fputs(line.c_str(), file_) == EOF || std::fputc('\n', file_) == EOF || std::fflush(file_) != 0) {
      fail(ErrorCode::IoError, "failed to append event " + std::to_string(draft.seq));
    }
  }
  last_seq_ = record.seq;
  return record;
}

std::uint64_t EventLog::last_seq() const {
  std::lock_guard lock(mutex_);
  return last_seq_;
}

}  // namespace fleetline::service
