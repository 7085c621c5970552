#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "lazevm/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return lazevm::runCommand(args, std::cout, std::cerr, std::getenv("LAZEVM_SEED"));
}
