#include <iostream>

#include "slicetrain/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return slicetrain::run_cli(args, std::cout, std::cerr).exit_code;
}
