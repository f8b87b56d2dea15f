#pragma once

namespace kway::cli {

// Runs one toolkit subcommand. Returns 0 on success, 1 on usage errors and
// 2 on data or file-format errors.
int dispatch(int argc, const char* const* argv);

}  // namespace kway::cli
