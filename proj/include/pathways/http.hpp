#pragma once

#include <memory>
#include <string>

#include "pathways/error.hpp"
#include "pathways/service.hpp"

namespace httplib {
class Server;
}

namespace pathways {

int http_status(ErrorCode code);

// JSON-over-HTTP front end for a SessionService.
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<SessionService> service);
  ~HttpServer();

  // Binds without serving; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool serve();
  void stop();
  bool running() const;

 private:
  std::shared_ptr<SessionService> service_;
  std::unique_ptr<httplib::Server> server_;
};

struct ListenAddress {
  std::string host = "127.0.0.1";
  int port = 8080;
};

// "host:port", ":port" or "port".
ListenAddress parse_listen_address(const std::string& text);

}  // namespace pathways
