#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>
#include <string>

#include "geo3d/client.hpp"
#include "geo3d/error.hpp"
#include "geo3d/server.hpp"
#include "support.hpp"

using namespace geo3d;

namespace {

SceneStore test_store() {
  SceneStore store;
  store.add(testsupport::quadrant_scene("sc01", 640, 480));
  store.add(testsupport::quadrant_scene("sc02", 320, 240));
  return store;
}

std::string intrinsics_request(const std::string& scene_id,
                               const std::string& call_id) {
  ToolCallBlock call;
  call.call_id = call_id;
  call.tool_name = "camera_intrinsics";
  call.arguments = ojson::object();
  return request_envelope_to_json(scene_id, call).dump();
}

std::string sampling_request(const std::string& scene_id,
                             const std::string& call_id,
                             const std::string& category, const Box2D& bbox) {
  ToolCallBlock call;
  call.call_id = call_id;
  call.tool_name = "depth_sampling";
  call.arguments = depth_sampling_args_to_json({{category, bbox}},
                                               SamplingConfig{});
  return request_envelope_to_json(scene_id, call).dump();
}

}  // namespace

TEST_CASE("dispatcher answers intrinsics requests") {
  const SceneStore store = test_store();
  const ToolDispatcher dispatcher(store);
  const std::string reply = dispatcher.handle_line(
      intrinsics_request("sc01", "9"));
  const ToolResponseBlock response =
      tool_response_from_json(ojson::parse(reply));
  CHECK(response.call_id == "9");
  REQUIRE(response.result.has_value());
  CHECK((*response.result)["fx"].get<double>() == doctest::Approx(499.2));
  CHECK((*response.result)["cx"].get<double>() == 320.0);
}

TEST_CASE("dispatcher reports unknown scenes as in-band errors") {
  const SceneStore store = test_store();
  const ToolDispatcher dispatcher(store);
  const std::string reply =
      dispatcher.handle_line(intrinsics_request("nope", "4"));
  const ToolResponseBlock response =
      tool_response_from_json(ojson::parse(reply));
  CHECK(response.call_id == "4");
  REQUIRE(response.error.has_value());
  CHECK(response.error->kind == "unknown_scene");
}

TEST_CASE("dispatcher answers malformed lines with a parse error") {
  const SceneStore store = test_store();
  const ToolDispatcher dispatcher(store);

  SUBCASE("broken json, no recoverable call_id") {
    const std::string reply = dispatcher.handle_line("{nope");
    const ojson j = ojson::parse(reply);
    CHECK(!j.contains("call_id"));
    CHECK(j["error"]["kind"] == "parse");
  }

  SUBCASE("valid json with a bad call still echoes the call_id") {
    const std::string reply = dispatcher.handle_line(
        "{\"scene_id\":\"sc01\",\"call\":{\"call_id\":\"3\","
        "\"tool_name\":\"laser\",\"arguments\":{}}}");
    const ojson j = ojson::parse(reply);
    CHECK(j["call_id"] == "3");
    CHECK(j["error"]["kind"] == "unknown_tool");
  }

  SUBCASE("out-of-bounds sampling box becomes a domain error") {
    const std::string reply = dispatcher.handle_line(
        sampling_request("sc01", "5", "chair", Box2D{0, 0, 9999, 480}));
    const ToolResponseBlock response =
        tool_response_from_json(ojson::parse(reply));
    REQUIRE(response.error.has_value());
    CHECK(response.error->kind == "domain");
  }
}

TEST_CASE("stdio transport answers every line in order") {
  const SceneStore store = test_store();
  std::istringstream in(intrinsics_request("sc01", "1") + "\n" +
                        sampling_request("sc02", "2", "sofa",
                                         Box2D{0, 0, 320, 240}) +
                        "\n" + intrinsics_request("missing", "3") + "\n");
  std::ostringstream out;
  serve_stdio(store, in, out);

  std::istringstream lines(out.str());
  std::string line;
  std::vector<ToolResponseBlock> responses;
  while (std::getline(lines, line))
    responses.push_back(tool_response_from_json(ojson::parse(line)));
  REQUIRE(responses.size() == 3);
  CHECK(responses[0].call_id == "1");
  CHECK(responses[0].result.has_value());
  CHECK(responses[1].call_id == "2");
  REQUIRE(responses[1].result.has_value());
  CHECK(!samples_from_json(*responses[1].result)[0].empty());
  CHECK(responses[2].call_id == "3");
  CHECK(responses[2].error.has_value());
}

TEST_CASE("tcp server answers pipelined requests in request order") {
  const SceneStore store = test_store();
  TcpToolServer server(store, "127.0.0.1:0");
  server.start();
  REQUIRE(server.port() > 0);

  {
    RemoteToolSuite remote("127.0.0.1", server.port());
    const CameraIntrinsics k = remote.camera_intrinsics("sc01");
    CHECK(k.fx == doctest::Approx(499.2));

    const auto samples = remote.depth_sampling(
        "sc02", {{"lamp", Box2D{0, 0, 320, 240}}}, SamplingConfig{});
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].size() == 5);

    SUBCASE("remote and local suites agree sample for sample") {
      SingleSceneToolSuite local(store.get("sc02"));
      const auto direct = local.depth_sampling(
          "sc02", {{"lamp", Box2D{0, 0, 320, 240}}}, SamplingConfig{});
      REQUIRE(direct[0].size() == samples[0].size());
      for (std::size_t i = 0; i < direct[0].size(); ++i) {
        CHECK(direct[0][i].u == samples[0][i].u);
        CHECK(direct[0][i].v == samples[0][i].v);
        CHECK(direct[0][i].z == samples[0][i].z);
      }
    }

    SUBCASE("unknown scene surfaces as a provider error") {
      try {
        remote.camera_intrinsics("missing");
        FAIL("expected provider error");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::provider);
        CHECK(std::string(e.what()).find("unknown_scene") !=
              std::string::npos);
      }
    }
  }

  server.stop();
}

TEST_CASE("two concurrent connections are served independently") {
  const SceneStore store = test_store();
  TcpToolServer server(store, "0");
  server.start();

  RemoteToolSuite a("127.0.0.1", server.port());
  RemoteToolSuite b("127.0.0.1", server.port());
  for (int i = 0; i < 10; ++i) {
    CHECK(a.camera_intrinsics("sc01").cx == 320.0);
    CHECK(b.camera_intrinsics("sc02").cx == 160.0);
  }

  server.stop();
}
