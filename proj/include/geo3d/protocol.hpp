#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "geo3d/codec.hpp"
#include "geo3d/tools.hpp"

namespace geo3d {

// Transcript fragments are sequences of tagged blocks:
//   <think>free text</think>
//   <tool_call>{"call_id","tool_name","arguments"}</tool_call>
//   <tool_response>{"call_id","result"} | {"call_id","error"}</tool_response>
//   <answer>[{"label","bbox_3d":[9 reals]}, ...]</answer>
// Tags are exact lowercase; JSON payloads are strict; whitespace is allowed
// only between blocks.

struct ThinkBlock {
  std::string text;
};

struct ToolCallBlock {
  std::string call_id;
  std::string tool_name;  // "camera_intrinsics" | "depth_sampling"
  ojson arguments;
};

struct ProtocolError {
  std::string kind;
  std::string message;
};

struct ToolResponseBlock {
  std::string call_id;
  std::optional<ojson> result;
  std::optional<ProtocolError> error;
};

struct AnswerItem {
  std::string label;
  Box3D box{{0, 0, 1}, 1, 1, 1, 0, 0, 0};
};

struct AnswerBlock {
  std::vector<AnswerItem> boxes;
};

using Block =
    std::variant<ThinkBlock, ToolCallBlock, ToolResponseBlock, AnswerBlock>;

std::vector<Block> parse_turn(std::string_view text);
std::string serialize_blocks(const std::vector<Block>& blocks);

ojson tool_call_to_json(const ToolCallBlock& b);
ToolCallBlock tool_call_from_json(const ojson& j);
ojson tool_response_to_json(const ToolResponseBlock& b);
ToolResponseBlock tool_response_from_json(const ojson& j);

// depth_sampling arguments: {"queries":[{"category","bbox_2d"}...],
// "n_points", "min_depth", "seed"}; the three config keys are optional on
// input and always written on output.
ojson depth_sampling_args_to_json(const std::vector<DepthQuery>& queries,
                                  const SamplingConfig& cfg);
std::pair<std::vector<DepthQuery>, SamplingConfig> depth_sampling_args_from_json(
    const ojson& args);

// depth_sampling result: {"samples":[[[u,v,Z],...], ...]} at full precision.
ojson samples_to_json(const std::vector<std::vector<DepthSample>>& samples);
std::vector<std::vector<DepthSample>> samples_from_json(const ojson& j);

// Newline-delimited request envelope: {"scene_id", "call": ToolCall}.
ojson request_envelope_to_json(const std::string& scene_id,
                               const ToolCallBlock& call);
std::pair<std::string, ToolCallBlock> request_envelope_from_json(
    const ojson& j);

}  // namespace geo3d
