#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"

namespace fleetline::service {

struct EventRecord {
  std::uint64_t seq = 0;
  std::int64_t ts = 0;
  std::string kind;
  nlohmann::json payload;

  // One line, keys sorted: {"kind":..,"payload":..,"seq":..,"ts":..}
  std::string to_line() const;
  // Throws Error{CorruptLog} on anything but a well-formed record.
  static EventRecord from_line(const std::string& line, std::uint64_t expected_seq);
};

inline constexpr const char* kEventLogFile = "events.log";

// Append-only, gap-free record log. Without a directory the log lives in
// memory only, which the unit tests use.
class EventLog {
 public:
  EventLog() = default;
  // Reads and validates <dir>/events.log (created if missing). Throws
  // Error{CorruptLog} naming the offending seq on framing errors or gaps.
  explicit EventLog(const std::filesystem::path& dir);
  ~EventLog();

  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  // Records loaded from disk at construction, in order.
  const std::vector<EventRecord>& loaded() const noexcept { return loaded_; }

  // Assigns the next seq, writes and flushes the line, and returns the
  // record as re-read from that line.
  EventRecord append(std::int64_t ts, std::string kind, nlohmann::json payload);

  std::uint64_t last_seq() const;
  bool persistent() const noexcept { return file_ != nullptr; }

 private:
  mutable std::mutex mutex_;
  std::FILE* file_ = nullptr;
  std::uint64_t last_seq_ = 0;
  std::vector<EventRecord> loaded_;
};

}  // namespace fleetline::service
