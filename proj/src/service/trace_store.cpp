#include "tasktrace/service/trace_store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <mutex>
#include <ostream>
#include <random>

namespace tasktrace::service {
namespace {

std::string errno_text() { return std::strerror(errno); }

std::string new_token() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  static constexpr char kHex[] = "0123456789abcdef";
  std::string token;
  for (int i = 0; i < 2; ++i) {
    auto v = rng();
    for (int j = 0; j < 16; ++j) {
      token.push_back(kHex[v & 0xf]);
      v >>= 4;
    }
  }
  return token;
}

}  // namespace

TraceStore::TraceStore(std::filesystem::path data_dir, StoreOptions options)
    : data_dir_(std::move(data_dir)),
      log_path_(options.log_file.value_or(data_dir_ / "traces.jsonl")),
      sessions_path_(data_dir_ / "sessions.jsonl") {
  std::error_code ec;
  if (!std::filesystem::is_directory(data_dir_, ec)) {
    throw StorageError("data directory '" + data_dir_.string() + "' does not exist");
  }
  if (::access(data_dir_.c_str(), W_OK) != 0) {
    throw StorageError("data directory '" + data_dir_.string() + "' is not writable");
  }

  if (std::filesystem::is_regular_file(log_path_, ec)) {
    std::ifstream in(log_path_, std::ios::binary);
    auto contents = read_jsonl(in);
    if (!contents.errors.empty()) {
      const auto& e = contents.errors.front();
      throw StorageError(log_path_.string() + ":" + std::to_string(e.line) + ": " + e.message);
    }
    for (auto& record : contents.records) {
      index_.emplace(record.trace.id, records_.size());
      records_.push_back(std::move(record));
    }
  }

  if (std::filesystem::is_regular_file(sessions_path_, ec)) {
    std::ifstream in(sessions_path_, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        sessions_.insert(nlohmann::json::parse(line).at("session").get<std::string>());
      } catch (const nlohmann::json::exception& e) {
        throw StorageError(sessions_path_.string() + ": " + e.what());
      }
    }
  }
}

void TraceStore::write_line(const std::filesystem::path& path, const std::string& line) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw StorageError("cannot open '" + path.string() + "': " + errno_text());

  struct stat st {};
  const bool regular = ::fstat(fd, &st) == 0 && S_ISREG(st.st_mode);
  const off_t before = regular ? st.st_size : 0;

  const std::string payload = line + "\n";
  std::size_t written = 0;
  std::string error;
  while (written < payload.size()) {
    const auto n = ::write(fd, payload.data() + written, payload.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      error = errno_text();
      break;
    }
    written += static_cast<std::size_t>(n);
  }
  if (error.empty() && regular && ::fsync(fd) != 0) error = errno_text();
  if (!error.empty() && regular) {
    // Drop any partial line.
    if (::ftruncate(fd, before) != 0) error += "; partial line left in log";
  }
  ::close(fd);
  if (!error.empty()) throw StorageError("cannot write '" + path.string() + "': " + error);
}

bool TraceStore::append(const StoreRecord& record) {
  std::unique_lock lock(mutex_);
  if (index_.contains(record.trace.id)) return false;
  write_line(log_path_, serialize_record(record));
  index_.emplace(record.trace.id, records_.size());
  records_.push_back(record);
  return true;
}

void TraceStore::supersede(const StoreRecord& record) {
  std::unique_lock lock(mutex_);
  const auto it = index_.find(record.trace.id);
  if (it == index_.end()) throw std::invalid_argument("unknown trace id '" + record.trace.id + "'");
  write_line(log_path_, serialize_record(record));
  records_[it->second] = record;
}

bool TraceStore::contains(const std::string& trace_id) const {
  std::shared_lock lock(mutex_);
  return index_.contains(trace_id);
}

std::optional<StoreRecord> TraceStore::find(const std::string& trace_id) const {
  std::shared_lock lock(mutex_);
  const auto it = index_.find(trace_id);
  if (it == index_.end()) return std::nullopt;
  return records_[it->second];
}

std::vector<StoreRecord> TraceStore::records() const {
  std::shared_lock lock(mutex_);
  return records_;
}

std::size_t TraceStore::size() const {
  std::shared_lock lock(mutex_);
  return records_.size();
}

void TraceStore::write_export(std::ostream& out) const {
  std::shared_lock lock(mutex_);
  for (const auto& record : records_) out << serialize_record(record) << '\n';
}

std::string TraceStore::acknowledge_session(const std::string& worker_id) {
  std::unique_lock lock(mutex_);
  std::string token = new_token();
  while (sessions_.contains(token)) token = new_token();
  nlohmann::ordered_json line{{"session", token}, {"worker_id", worker_id}};
  write_line(sessions_path_, line.dump());
  sessions_.insert(token);
  return token;
}

bool TraceStore::session_acknowledged(const std::string& token) const {
  std::shared_lock lock(mutex_);
  return sessions_.contains(token);
}

}  // namespace tasktrace::service
