#include <iostream>

#include "kdelab/cli.hpp"

int main(int argc, char** argv) {
    return kdelab::cli::run_cli(argc, argv, std::cout, std::cerr);
}
