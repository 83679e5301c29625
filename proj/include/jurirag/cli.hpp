#pragma once

#include <iosfwd>

#include "jurirag/engine.hpp"

namespace jurirag {

/// Entry point for the `jurirag` tool. `env` and `transport` are injectable
/// so tests can pin configuration and observe network use.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            HttpTransport& transport, const EnvLookup& env = process_env());

}  // namespace jurirag
