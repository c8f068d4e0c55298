#pragma once

#include <memory>
#include <string>
#include <thread>

#include "rankwise/api.hpp"
#include "rankwise/config.hpp"

namespace httplib {
class Server;
}

namespace rankwise {

/// HTTP binding of Api. Requests are served on httplib's worker pool.
class Service {
 public:
  explicit Service(Api& api);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and starts listening in a background thread. Port 0 picks a free
  /// port. Throws IoError if the address cannot be bound.
  void start(const ListenAddress& address);
  std::uint16_t port() const { return port_; }
  void stop();

 private:
  Api& api_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::uint16_t port_ = 0;
};

}  // namespace rankwise
