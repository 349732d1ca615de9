#include "tasktrace/service/http_server.hpp"

#include <httplib.h>

#include "tasktrace/service/service.hpp"

namespace tasktrace::service {
namespace {

void send(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type);
}

}  // namespace

HttpServer::HttpServer(Service& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;
  s.Get("/categories", [this](const httplib::Request&, httplib::Response& res) {
    send(res, service_.list_categories());
  });
  s.Get(R"(/categories/([a-z_]+)/steps)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.category_steps(req.matches[1]));
  });
  s.Post("/traces", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> session;
    if (req.has_header("X-Session-Token")) session = req.get_header_value("X-Session-Token");
    send(res, service_.submit_trace(req.body, session));
  });
  s.Get("/traces/export", [this](const httplib::Request&, httplib::Response& res) {
    send(res, service_.export_traces());
  });
  s.Get("/stats", [this](const httplib::Request&, httplib::Response& res) {
    send(res, service_.stats());
  });
  s.Post("/models/rebuild", [this](const httplib::Request&, httplib::Response& res) {
    send(res, service_.rebuild_models());
  });
  s.Post(R"(/categories/([a-z_]+)/suggest)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.suggest(req.matches[1], req.body));
  });
  s.Post("/sessions/acknowledge", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.acknowledge_session(req.body));
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen_after_bind() { return server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

bool HttpServer::is_running() const { return server_->is_running(); }

}  // namespace tasktrace::service
