#include "rankwise/service.hpp"

#include <httplib.h>

#include "rankwise/error.hpp"

namespace rankwise {

namespace {

void send(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  if (!r.filename.empty()) res.set_header("Content-Disposition", "attachment; filename=\"" + r.filename + "\"");
  res.set_content(r.body, r.content_type);
}

std::optional<std::string> query(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

}  // namespace

Service::Service(Api& api) : api_(api), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;
  s.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  s.Post("/cadets", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, api_.create_cadet(req.body));
  });
  s.Get("/cadets", [this](const httplib::Request&, httplib::Response& res) { send(res, api_.list_cadets()); });
  s.Get(R"(/cadets/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, api_.get_cadet(req.matches[1]));
  });
  s.Put(R"(/cadets/([^/]+)/rank)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, api_.update_rank(req.matches[1], req.body));
  });
  s.Put(R"(/cadets/([^/]+)/marks)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, api_.submit_marks(req.matches[1], req.body));
  });
  s.Post(R"(/cadets/([^/]+)/evaluate)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, api_.evaluate(req.matches[1], req.body));
  });
  s.Post(R"(/cadets/([^/]+)/notes)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, api_.add_note(req.matches[1], req.body));
  });
  s.Get(R"(/traces/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, api_.get_trace(req.matches[1], query(req, "view")));
  });
  s.Get("/rankings", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, api_.rankings(query(req, "cycle")));
  });
  s.Post("/whatif", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, api_.what_if(req.body));
  });
  s.Get("/export", [this](const httplib::Request&, httplib::Response& res) { send(res, api_.export_archive()); });
  s.Get("/ready", [this](const httplib::Request&, httplib::Response& res) { send(res, api_.ready()); });

  s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    const std::string message = res.status == 404 ? "no route for " + req.method + " " + req.path
                                                  : "request failed with status " + std::to_string(res.status);
    const int status = res.status;
    ErrorCategory category = status == 404 ? ErrorCategory::NotFound : ErrorCategory::Validation;
    send(res, error_response(Error(category, message)));
    res.status = status;
  });
  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send(res, error_response(e));
    } catch (...) {
      send(res, error_response(IoError("unknown failure")));
    }
  });
}

Service::~Service() { stop(); }

void Service::start(const ListenAddress& address) {
  int bound = -1;
  if (address.port == 0) {
    bound = server_->bind_to_any_port(address.host);
  } else if (server_->bind_to_port(address.host, address.port)) {
    bound = address.port;
  }
  if (bound <= 0) {
    throw IoError("cannot listen on " + address.host + ":" + std::to_string(address.port));
  }
  port_ = static_cast<std::uint16_t>(bound);
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void Service::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace rankwise
