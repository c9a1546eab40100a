#pragma once

#include <atomic>
#include <istream>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "geo3d/protocol.hpp"
#include "geo3d/scene.hpp"

namespace geo3d {

// Turns one request-envelope line into one response line. Shared by the
// stdio and TCP transports; stateless and safe for concurrent use.
class ToolDispatcher {
 public:
  explicit ToolDispatcher(const SceneStore& store) : store_(&store) {}

  std::string handle_line(const std::string& line) const;

 private:
  const SceneStore* store_;
};

// Reads envelopes line by line until EOF, answering in request order.
void serve_stdio(const SceneStore& store, std::istream& in, std::ostream& out);

// Thread-per-connection TCP transport for the same dispatch loop.
// bind_addr is "host:port", ":port", or "port"; port 0 picks an ephemeral
// port, readable via port() after construction.
class TcpToolServer {
 public:
  TcpToolServer(const SceneStore& store, const std::string& bind_addr);
  ~TcpToolServer();

  TcpToolServer(const TcpToolServer&) = delete;
  TcpToolServer& operator=(const TcpToolServer&) = delete;

  int port() const { return port_; }
  void start();  // accept loop on a background thread
  void run();    // accept loop on the calling thread
  void stop();

 private:
  void accept_loop();
  void serve_connection(int fd);

  ToolDispatcher dispatcher_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex mu_;
  std::vector<std::thread> connections_;
  std::vector<int> live_fds_;  // shut down on stop() to unblock recv
};

}  // namespace geo3d
