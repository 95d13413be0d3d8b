#include <iostream>
#include <string>
#include <vector>

#include "qso/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return qso::run(args, std::cout, std::cerr);
}
