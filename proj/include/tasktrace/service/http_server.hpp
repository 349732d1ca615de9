#pragma once

#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace tasktrace::service {

class Service;

// Maps the HTTP endpoints onto a Service:
//   GET  /categories               GET  /categories/{slug}/steps
//   POST /traces                   GET  /traces/export
//   GET  /stats                    POST /models/rebuild
//   POST /categories/{slug}/suggest
//   POST /sessions/acknowledge
// Submissions carry the session token in the X-Session-Token header.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port, or -1 on failure.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called.
  bool listen_after_bind();
  void stop();
  bool is_running() const;

 private:
  Service& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace tasktrace::service
