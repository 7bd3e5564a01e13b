#include <iostream>
#include <string>
#include <vector>

#include "lltrace/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return lltrace::run_cli(args, std::cout, std::cerr);
}
