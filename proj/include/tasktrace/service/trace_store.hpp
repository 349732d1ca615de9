#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "tasktrace/dataset.hpp"

namespace tasktrace::service {

class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StoreOptions {
  // Overrides <data_dir>/traces.jsonl; used to point the log at a device.
  std::optional<std::filesystem::path> log_file;
};

// Append-only JSON-lines log of StoreRecords plus the acknowledged-session
// list. One writer at a time; readers see whole records only. A record is
// visible in memory only after its line has been written and synced.
class TraceStore {
 public:
  // Replays the existing log. Throws StorageError if the data directory is
  // missing or not writable, or if the log holds a malformed line.
  explicit TraceStore(std::filesystem::path data_dir, StoreOptions options = {});

  TraceStore(const TraceStore&) = delete;
  TraceStore& operator=(const TraceStore&) = delete;

  const std::filesystem::path& data_dir() const { return data_dir_; }
  const std::filesystem::path& log_path() const { return log_path_; }

  // False (nothing written) when the trace id already exists. Throws
  // StorageError on I/O failure, leaving the log as it was.
  bool append(const StoreRecord& record);

  // Appends a record that replaces the current state of an existing trace.
  // Throws std::invalid_argument for an unknown id, StorageError on I/O.
  void supersede(const StoreRecord& record);

  bool contains(const std::string& trace_id) const;
  std::optional<StoreRecord> find(const std::string& trace_id) const;

  // Current state of every trace, in first-submission order.
  std::vector<StoreRecord> records() const;
  std::size_t size() const;

  // Canonical record lines, one per trace, in submission order.
  void write_export(std::ostream& out) const;

  std::string acknowledge_session(const std::string& worker_id);
  bool session_acknowledged(const std::string& token) const;

 private:
  void write_line(const std::filesystem::path& path, const std::string& line);

  std::filesystem::path data_dir_;
  std::filesystem::path log_path_;
  std::filesystem::path sessions_path_;

  mutable std::shared_mutex mutex_;
  std::vector<StoreRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
  std::set<std::string> sessions_;
};

}  // namespace tasktrace::service
