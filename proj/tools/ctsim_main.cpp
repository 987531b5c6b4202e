#include <string>
#include <vector>

#include "ctsim/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ctsim::cli_main(args);
}
