#include "geo3d/protocol.hpp"

#include <algorithm>

#include "geo3d/error.hpp"

namespace geo3d {

namespace {

constexpr const char* kToolNames[] = {"camera_intrinsics", "depth_sampling"};

bool known_tool(const std::string& name) {
  return std::find(std::begin(kToolNames), std::end(kToolNames), name) !=
         std::end(kToolNames);
}

[[noreturn]] void fail_at(ErrorKind kind, const std::string& what,
                          std::size_t offset) {
  fail(kind, what + " at byte offset " + std::to_string(offset));
}

void expect_keys(const ojson& j, std::initializer_list<const char*> keys,
                 const char* context) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) {
          return it.key() == k;
        }) == keys.end())
      fail(ErrorKind::parse, std::string(context) + ": unexpected field \"" +
                                 it.key() + "\"");
  }
}

void validate_arguments(const std::string& tool_name, const ojson& args) {
  if (!args.is_object())
    fail(ErrorKind::parse, "tool arguments must be an object");
  if (tool_name == "camera_intrinsics") {
    if (!args.empty())
      fail(ErrorKind::parse, "camera_intrinsics takes no arguments");
  } else if (tool_name == "depth_sampling") {
    depth_sampling_args_from_json(args);
  }
}

struct Tag {
  const char* open;
  const char* close;
  bool json;
};

constexpr Tag kTags[] = {
    {"<think>", "</think>", false},
    {"<tool_call>", "</tool_call>", true},
    {"<tool_response>", "</tool_response>", true},
    {"<answer>", "</answer>", true},
};

ojson parse_payload(std::string_view payload, std::size_t offset,
                    const char* tag) {
  try {
    return ojson::parse(payload);
  } catch (const std::exception& e) {
    fail_at(ErrorKind::parse,
            std::string("malformed ") + tag + " payload (" + e.what() + ")",
            offset);
  }
}

ojson answer_to_json(const AnswerBlock& b) {
  ojson arr = ojson::array();
  for (const auto& item : b.boxes)
    arr.push_back(
        ojson{{"label", item.label}, {"bbox_3d", box3d_to_json(item.box)}});
  return arr;
}

AnswerBlock answer_from_json(const ojson& j) {
  if (!j.is_array())
    fail(ErrorKind::parse, "answer payload must be a JSON list");
  AnswerBlock out;
  for (const auto& ji : j) {
    expect_keys(ji, {"label", "bbox_3d"}, "answer item");
    AnswerItem item;
    item.label = require_string(ji, "label", "answer item");
    item.box = box3d_from_json(require_field(ji, "bbox_3d", "answer item"));
    out.boxes.push_back(std::move(item));
  }
  return out;
}

}  // namespace

ojson tool_call_to_json(const ToolCallBlock& b) {
  if (!known_tool(b.tool_name))
    fail(ErrorKind::unknown_tool, "unknown tool_name \"" + b.tool_name + "\"");
  validate_arguments(b.tool_name, b.arguments);
  return ojson{{"call_id", b.call_id},
               {"tool_name", b.tool_name},
               {"arguments", b.arguments}};
}

ToolCallBlock tool_call_from_json(const ojson& j) {
  expect_keys(j, {"call_id", "tool_name", "arguments"}, "tool_call");
  ToolCallBlock b;
  b.call_id = require_string(j, "call_id", "tool_call");
  b.tool_name = require_string(j, "tool_name", "tool_call");
  if (!known_tool(b.tool_name))
    fail(ErrorKind::unknown_tool, "unknown tool_name \"" + b.tool_name + "\"");
  b.arguments = require_field(j, "arguments", "tool_call");
  validate_arguments(b.tool_name, b.arguments);
  return b;
}

ojson tool_response_to_json(const ToolResponseBlock& b) {
  if (b.result.has_value() == b.error.has_value())
    fail(ErrorKind::protocol,
         "tool_response must carry exactly one of result/error");
  ojson j{{"call_id", b.call_id}};
  if (b.result)
    j["result"] = *b.result;
  else
    j["error"] = ojson{{"kind", b.error->kind}, {"message", b.error->message}};
  return j;
}

ToolResponseBlock tool_response_from_json(const ojson& j) {
  expect_keys(j, {"call_id", "result", "error"}, "tool_response");
  ToolResponseBlock b;
  b.call_id = require_string(j, "call_id", "tool_response");
  const bool has_result = j.contains("result");
  const bool has_error = j.contains("error");
  if (has_result == has_error)
    fail(ErrorKind::protocol,
         "tool_response must carry exactly one of result/error");
  if (has_result) {
    b.result = j["result"];
  } else {
    const ojson& e = j["error"];
    expect_keys(e, {"kind", "message"}, "tool_response error");
    b.error = ProtocolError{require_string(e, "kind", "tool_response error"),
                            require_string(e, "message", "tool_response error")};
  }
  return b;
}

ojson depth_sampling_args_to_json(const std::vector<DepthQuery>& queries,
                                  const SamplingConfig& cfg) {
  cfg.validate();
  ojson qs = ojson::array();
  for (const auto& q : queries) {
    q.bbox2d.validate();
    qs.push_back(ojson{{"category", q.category},
                       {"bbox_2d", box2d_to_json(q.bbox2d)}});
  }
  return ojson{{"queries", std::move(qs)},
               {"n_points", cfg.n_points},
               {"min_depth", cfg.min_depth},
               {"seed", cfg.seed}};
}

std::pair<std::vector<DepthQuery>, SamplingConfig>
depth_sampling_args_from_json(const ojson& args) {
  expect_keys(args, {"queries", "n_points", "min_depth", "seed"},
              "depth_sampling arguments");
  const ojson& qs = require_field(args, "queries", "depth_sampling arguments");
  if (!qs.is_array())
    fail(ErrorKind::parse, "depth_sampling arguments: \"queries\" must be an "
                           "array");
  std::vector<DepthQuery> queries;
  for (const auto& jq : qs) {
    expect_keys(jq, {"category", "bbox_2d"}, "depth query");
    DepthQuery q;
    q.category = require_string(jq, "category", "depth query");
    q.bbox2d = box2d_from_json(require_field(jq, "bbox_2d", "depth query"));
    queries.push_back(std::move(q));
  }
  SamplingConfig cfg;
  if (args.contains("n_points"))
    cfg.n_points =
        static_cast<int>(require_int(args, "n_points", "depth_sampling"));
  if (args.contains("min_depth"))
    cfg.min_depth = require_real(args, "min_depth", "depth_sampling");
  if (args.contains("seed"))
    cfg.seed = static_cast<std::uint64_t>(
        require_int(args, "seed", "depth_sampling"));
  cfg.validate();
  return {std::move(queries), cfg};
}

ojson samples_to_json(const std::vector<std::vector<DepthSample>>& samples) {
  ojson per_query = ojson::array();
  for (const auto& list : samples) {
    ojson triplets = ojson::array();
    for (const auto& s : list)
      triplets.push_back(ojson::array({s.u, s.v, s.z}));
    per_query.push_back(std::move(triplets));
  }
  return ojson{{"samples", std::move(per_query)}};
}

std::vector<std::vector<DepthSample>> samples_from_json(const ojson& j) {
  expect_keys(j, {"samples"}, "depth_sampling result");
  const ojson& per_query = require_field(j, "samples", "depth_sampling result");
  if (!per_query.is_array())
    fail(ErrorKind::parse, "depth_sampling result: \"samples\" must be an "
                           "array");
  std::vector<std::vector<DepthSample>> out;
  for (const auto& jl : per_query) {
    if (!jl.is_array())
      fail(ErrorKind::parse, "depth_sampling result: each query entry must be "
                             "an array");
    std::vector<DepthSample> list;
    for (const auto& jt : jl) {
      if (!jt.is_array() || jt.size() != 3 || !jt[0].is_number_integer() ||
          !jt[1].is_number_integer() || !jt[2].is_number())
        fail(ErrorKind::parse, "depth sample must be [u, v, Z]");
      list.push_back(
          {jt[0].get<int>(), jt[1].get<int>(), jt[2].get<double>()});
    }
    out.push_back(std::move(list));
  }
  return out;
}

ojson request_envelope_to_json(const std::string& scene_id,
                               const ToolCallBlock& call) {
  return ojson{{"scene_id", scene_id}, {"call", tool_call_to_json(call)}};
}

std::pair<std::string, ToolCallBlock> request_envelope_from_json(
    const ojson& j) {
  expect_keys(j, {"scene_id", "call"}, "request envelope");
  return {require_string(j, "scene_id", "request envelope"),
          tool_call_from_json(require_field(j, "call", "request envelope"))};
}

std::vector<Block> parse_turn(std::string_view text) {
  std::vector<Block> blocks;
  std::size_t pos = 0;
  const std::size_t n = text.size();
  while (pos < n) {
    if (std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
      continue;
    }
    if (text[pos] != '<')
      fail_at(ErrorKind::parse, "unexpected text outside any block", pos);
    const Tag* tag = nullptr;
    for (const Tag& t : kTags) {
      const std::string_view open(t.open);
      if (text.substr(pos, open.size()) == open) {
        tag = &t;
        break;
      }
    }
    if (tag == nullptr) fail_at(ErrorKind::parse, "unknown tag", pos);

    const std::size_t payload_start = pos + std::string_view(tag->open).size();
    const std::size_t close_pos = text.find(tag->close, payload_start);
    if (close_pos == std::string_view::npos) {
      if (tag->json) {
        // Diagnose the payload first so truncated JSON reports where the
        // payload breaks rather than just the missing close tag.
        parse_payload(text.substr(payload_start), payload_start, tag->open);
      }
      fail_at(ErrorKind::parse,
              std::string("unterminated ") + tag->open + " block opened", pos);
    }
    const std::string_view payload =
        text.substr(payload_start, close_pos - payload_start);

    if (!tag->json) {
      blocks.emplace_back(ThinkBlock{std::string(payload)});
    } else {
      const ojson j = parse_payload(payload, payload_start, tag->open);
      try {
        if (std::string_view(tag->open) == "<tool_call>")
          blocks.emplace_back(tool_call_from_json(j));
        else if (std::string_view(tag->open) == "<tool_response>")
          blocks.emplace_back(tool_response_from_json(j));
        else
          blocks.emplace_back(answer_from_json(j));
      } catch (const Error& e) {
        fail_at(e.kind(), e.what(), payload_start);
      }
    }
    pos = close_pos + std::string_view(tag->close).size();
  }
  return blocks;
}

std::string serialize_blocks(const std::vector<Block>& blocks) {
  std::string out;
  bool first = true;
  for (const auto& block : blocks) {
    if (!first) out += "\n";
    first = false;
    std::visit(
        [&out](const auto& b) {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, ThinkBlock>) {
            out += "<think>" + b.text + "</think>";
          } else if constexpr (std::is_same_v<T, ToolCallBlock>) {
            out += "<tool_call>" + tool_call_to_json(b).dump() +
                   "</tool_call>";
          } else if constexpr (std::is_same_v<T, ToolResponseBlock>) {
            out += "<tool_response>" + tool_response_to_json(b).dump() +
                   "</tool_response>";
          } else {
            out += "<answer>" + answer_to_json(b).dump() + "</answer>";
          }
        },
        block);
  }
  return out;
}

}  // namespace geo3d
