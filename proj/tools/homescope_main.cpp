#include <vector>

#include "homescope/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return homescope::run_subcommand(args);
}
