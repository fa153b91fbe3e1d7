#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bnvar {

/// Stable error codes. The CLI prints them verbatim and maps each one to an
/// exit status through `exit_status()`.
enum class ErrorCode {
  usage,             // bad arguments to an operation (precondition violated)
  syntax,            // malformed network / evidence document
  schema,            // document parses but violates the network model
  simplex,           // probability vector off the simplex
  zero_evidence,     // evidence has probability zero
  unsupported,       // analysis not available for this network / evidence
  not_enumerable,    // oracle asked to enumerate a Dirichlet spec or too many combinations
  no_convergence,    // iterative numerical routine hit its cap
  cap_exceeded,      // planner search passed its upper limit
  io,                // input file missing or unreadable
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::usage: return "E_USAGE";
    case ErrorCode::syntax: return "E_SYNTAX";
    case ErrorCode::schema: return "E_SCHEMA";
    case ErrorCode::simplex: return "E_SIMPLEX";
    case ErrorCode::zero_evidence: return "E_ZERO_EVIDENCE";
    case ErrorCode::unsupported: return "E_UNSUPPORTED";
    case ErrorCode::not_enumerable: return "E_NOT_ENUMERABLE";
    case ErrorCode::no_convergence: return "E_NO_CONVERGENCE";
    case ErrorCode::cap_exceeded: return "E_CAP_EXCEEDED";
    case ErrorCode::io: return "E_IO";
  }
  return "E_UNKNOWN";
}

/// CLI exit status: 1 usage, 2 data error, 3 unsupported analysis.
constexpr int exit_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::usage: return 1;
    case ErrorCode::unsupported: return 3;
    default: return 2;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace bnvar
