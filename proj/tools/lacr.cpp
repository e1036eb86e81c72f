#include <iostream>

#include "lacr/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return lacr::run_cli(args, std::cout, std::cerr);
}
