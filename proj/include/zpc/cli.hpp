#pragma once

/// Command-line driver. `run` parses argv, computes, and writes CSV or JSON to
/// `out` or, with --out, atomically to a file next to a .meta.json sidecar.

#include <iosfwd>
#include <string>

namespace zpc::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kComputation = 2,
  kCertification = 3,
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Writes `data` to `path` through a temporary file in the same directory and a rename.
void write_atomic(const std::string& path, const std::string& data);

}  // namespace zpc::cli
