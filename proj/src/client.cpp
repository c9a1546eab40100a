#include "geo3d/client.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "geo3d/error.hpp"

namespace geo3d {

RemoteToolSuite::RemoteToolSuite(const std::string& host, int port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) fail(ErrorKind::io, "socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    fd_ = -1;
    fail(ErrorKind::config, "bad host: " + host);
  }
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd_);
    fd_ = -1;
    fail(ErrorKind::io,
         "cannot connect to " + host + ":" + std::to_string(port));
  }
}

RemoteToolSuite::~RemoteToolSuite() {
  if (fd_ >= 0) ::close(fd_);
}

std::string RemoteToolSuite::read_line() {
  char chunk[4096];
  while (true) {
    const std::size_t eol = buffer_.find('\n');
    if (eol != std::string::npos) {
      std::string line = buffer_.substr(0, eol);
      buffer_.erase(0, eol + 1);
      return line;
    }
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n <= 0) fail(ErrorKind::io, "tool server closed the connection");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

ojson RemoteToolSuite::roundtrip(const std::string& scene_id,
                                 ToolCallBlock call) {
  call.call_id = std::to_string(next_id_++);
  const std::string line =
      request_envelope_to_json(scene_id, call).dump() + "\n";
  std::size_t sent = 0;
  while (sent < line.size()) {
    const ssize_t n = ::send(fd_, line.data() + sent, line.size() - sent, 0);
    if (n <= 0) fail(ErrorKind::io, "send to tool server failed");
    sent += static_cast<std::size_t>(n);
  }

  ojson j;
  try {
    j = ojson::parse(read_line());
  } catch (const std::exception& e) {
    fail(ErrorKind::protocol,
         std::string("bad response from tool server: ") + e.what());
  }
  const ToolResponseBlock r = tool_response_from_json(j);
  if (r.call_id != call.call_id)
    fail(ErrorKind::protocol, "response call_id " + r.call_id +
                                  " does not match request " + call.call_id);
  if (r.error)
    fail(ErrorKind::provider,
         "tool server error (" + r.error->kind + "): " + r.error->message);
  return *r.result;
}

CameraIntrinsics RemoteToolSuite::camera_intrinsics(
    const std::string& scene_id) {
  ToolCallBlock call;
  call.tool_name = "camera_intrinsics";
  call.arguments = ojson::object();
  return intrinsics_from_json(roundtrip(scene_id, std::move(call)));
}

std::vector<std::vector<DepthSample>> RemoteToolSuite::depth_sampling(
    const std::string& scene_id, const std::vector<DepthQuery>& queries,
    const SamplingConfig& cfg) {
  ToolCallBlock call;
  call.tool_name = "depth_sampling";
  call.arguments = depth_sampling_args_to_json(queries, cfg);
  return samples_from_json(roundtrip(scene_id, std::move(call)));
}

}  // namespace geo3d
