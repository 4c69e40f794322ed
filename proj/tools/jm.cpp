#include <iostream>
#include <string>
#include <vector>

#include "jm/cli.hpp"

int main(int argc, char** argv) {
    jm::configure_logging();
    const std::vector<std::string> args(argv + 1, argv + argc);
    return jm::run_cli(args, std::cout, std::cerr);
}
