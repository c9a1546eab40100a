#include "geo3d/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>

#include "geo3d/error.hpp"
#include "geo3d/tools.hpp"

namespace geo3d {

namespace {

ToolResponseBlock error_response(const std::string& call_id, ErrorKind kind,
                                 const std::string& message) {
  ToolResponseBlock r;
  r.call_id = call_id;
  r.error = ProtocolError{error_kind_name(kind), message};
  return r;
}

std::string dump_response(const ToolResponseBlock& r) {
  ojson j = tool_response_to_json(r);
  if (r.call_id.empty()) j.erase("call_id");  // unresolvable request line
  return j.dump();
}

}  // namespace

std::string ToolDispatcher::handle_line(const std::string& line) const {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const std::exception& e) {
    return dump_response(error_response(
        "", ErrorKind::parse, std::string("bad request line: ") + e.what()));
  }

  // Echo the call_id whenever the envelope carries a readable one.
  std::string call_id;
  if (j.is_object() && j.contains("call") && j["call"].is_object() &&
      j["call"].contains("call_id") && j["call"]["call_id"].is_string())
    call_id = j["call"]["call_id"].get<std::string>();

  try {
    auto [scene_id, call] = request_envelope_from_json(j);
    const SceneRecord& scene = store_->get(scene_id);
    ToolResponseBlock r;
    r.call_id = call.call_id;
    if (call.tool_name == "camera_intrinsics") {
      r.result = intrinsics_to_json(camera_intrinsic_tool(scene));
    } else {
      auto [queries, cfg] = depth_sampling_args_from_json(call.arguments);
      GtMaskProvider masks;
      GtDepthProvider depths;
      r.result =
          samples_to_json(depth_sampling_tool(scene, queries, cfg, masks,
                                              depths));
    }
    return dump_response(r);
  } catch (const Error& e) {
    return dump_response(error_response(call_id, e.kind(), e.what()));
  } catch (const std::exception& e) {
    return dump_response(error_response(call_id, ErrorKind::protocol,
                                        e.what()));
  }
}

void serve_stdio(const SceneStore& store, std::istream& in,
                 std::ostream& out) {
  const ToolDispatcher dispatcher(store);
  std::string line;
  while (std::getline(in, line)) {
    out << dispatcher.handle_line(line) << "\n";
    out.flush();
  }
}

namespace {

bool send_all(int fd, const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, 0);
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace

TcpToolServer::TcpToolServer(const SceneStore& store,
                             const std::string& bind_addr)
    : dispatcher_(store) {
  std::string host = "127.0.0.1";
  std::string port_str = bind_addr;
  const auto colon = bind_addr.rfind(':');
  if (colon != std::string::npos) {
    if (colon > 0) host = bind_addr.substr(0, colon);
    port_str = bind_addr.substr(colon + 1);
  }
  int port = 0;
  try {
    port = port_str.empty() ? 0 : std::stoi(port_str);
  } catch (const std::exception&) {
    fail(ErrorKind::config, "bad TCP address: " + bind_addr);
  }
  if (port < 0 || port > 65535)
    fail(ErrorKind::config, "bad TCP port: " + port_str);

  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) fail(ErrorKind::io, "socket() failed");
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    fail(ErrorKind::config, "bad TCP host: " + host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) !=
      0) {
    ::close(listen_fd_);
    fail(ErrorKind::io, "bind failed for " + bind_addr);
  }
  if (::listen(listen_fd_, 16) != 0) {
    ::close(listen_fd_);
    fail(ErrorKind::io, "listen failed for " + bind_addr);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = static_cast<int>(ntohs(bound.sin_port));
}

TcpToolServer::~TcpToolServer() { stop(); }

void TcpToolServer::start() {
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void TcpToolServer::run() { accept_loop(); }

void TcpToolServer::accept_loop() {
  while (!stopping_.load()) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) break;
    std::lock_guard<std::mutex> lock(mu_);
    if (stopping_.load()) {
      ::close(fd);
      break;
    }
    live_fds_.push_back(fd);
    connections_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void TcpToolServer::serve_connection(int fd) {
  std::string buffer;
  char chunk[4096];
  while (true) {
    const std::size_t eol = buffer.find('\n');
    if (eol != std::string::npos) {
      const std::string line = buffer.substr(0, eol);
      buffer.erase(0, eol + 1);
      if (!send_all(fd, dispatcher_.handle_line(line) + "\n")) break;
      continue;
    }
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    live_fds_.erase(std::remove(live_fds_.begin(), live_fds_.end(), fd),
                    live_fds_.end());
  }
  ::close(fd);
}

void TcpToolServer::stop() {
  if (stopping_.exchange(true)) return;
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> conns;
  {
    std::lock_guard<std::mutex> lock(mu_);
    conns.swap(connections_);
    for (int fd : live_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : conns)
    if (t.joinable()) t.join();
}

}  // namespace geo3d
