#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"

int main(int argc, char** argv) {
    erem::cli::configure_logging();
    std::vector<std::string> args(argv + 1, argv + argc);
    return erem::cli::run(args, std::cout, std::cerr);
}
