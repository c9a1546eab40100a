#pragma once

#include <string>

#include "geo3d/protocol.hpp"
#include "geo3d/tools.hpp"

namespace geo3d {

// ToolSuite backend that speaks the newline-delimited envelope protocol to a
// remote tool server over one blocking TCP connection.
class RemoteToolSuite : public ToolSuite {
 public:
  RemoteToolSuite(const std::string& host, int port);
  ~RemoteToolSuite() override;

  RemoteToolSuite(const RemoteToolSuite&) = delete;
  RemoteToolSuite& operator=(const RemoteToolSuite&) = delete;

  CameraIntrinsics camera_intrinsics(const std::string& scene_id) override;
  std::vector<std::vector<DepthSample>> depth_sampling(
      const std::string& scene_id, const std::vector<DepthQuery>& queries,
      const SamplingConfig& cfg) override;

 private:
  ojson roundtrip(const std::string& scene_id, ToolCallBlock call);
  std::string read_line();

  int fd_ = -1;
  std::string buffer_;
  std::uint64_t next_id_ = 1;
};

}  // namespace geo3d
