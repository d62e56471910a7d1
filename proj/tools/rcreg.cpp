#include <iostream>

#include "rcreg/cli/commands.hpp"

int main(int argc, char** argv) { return rcreg::cli::run_cli(argc, argv, std::cout, std::cerr); }
