// qhe: command-line front end.

#include <iostream>

#include "qhe/cli.hpp"

int main(int argc, char** argv) {
    return qhe::run_cli(argc, argv, std::cout, std::cerr);
}
