#pragma once

#include <string>
#include <vector>

namespace bns {

// Full command-line surface: ingest | synth | impact | sweep | scan | export
// | rerun. Returns the process exit code (0 ok, 2 input error, 3
// coverage/config error, 4 internal invariant violation).
int cli_main(int argc, const char* const* argv);

}  // namespace bns
