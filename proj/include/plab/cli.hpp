#pragma once

namespace plab {

/// Entry point of the `plab` tool. Returns 0 on success, 1 on input errors,
/// 2 on runtime or numerical errors.
int run_cli(int argc, char** argv);

}  // namespace plab
