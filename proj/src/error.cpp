#include "geo3d/error.hpp"

namespace geo3d {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
    case ErrorKind::validation: return "validation";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::referential: return "referential";
    case ErrorKind::not_visible: return "not_visible";
    case ErrorKind::provider: return "provider";
    case ErrorKind::config: return "config";
    case ErrorKind::protocol: return "protocol";
    case ErrorKind::unknown_scene: return "unknown_scene";
    case ErrorKind::unknown_tool: return "unknown_tool";
  }
  return "unknown";
}

}  // namespace geo3d
