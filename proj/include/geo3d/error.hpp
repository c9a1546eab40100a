#pragma once

#include <stdexcept>
#include <string>

namespace geo3d {

// Every failure in the toolkit carries one of these kinds so callers (and the
// wire protocol) can react without string-matching messages.
enum class ErrorKind {
  domain,              // argument outside its contract (non-positive depth, bad factor, ...)
  parse,               // malformed text, JSON, or raster header
  io,                  // missing or unreadable file
  validation,          // record invariant violated
  dimension_mismatch,  // raster size disagrees with image metadata
  referential,         // reference to a missing entity (instance id, ...)
  not_visible,         // geometry entirely behind the camera
  provider,            // mask/depth provider failure
  config,              // bad or missing configuration
  protocol,            // wire-format violation
  unknown_scene,
  unknown_tool,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace geo3d
