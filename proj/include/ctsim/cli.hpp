#ifndef CTSIM_CLI_HPP
#define CTSIM_CLI_HPP

#include <string>
#include <vector>

namespace ctsim {

// Entry point behind the ctsim binary; callable in-process from tests.
// Exit codes: 0 success, 2 configuration error, 3 runtime invariant
// violation, 1 anything else.
int cli_main(const std::vector<std::string>& args);

} // namespace ctsim

#endif
