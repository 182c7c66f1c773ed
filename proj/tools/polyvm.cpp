#include <iostream>

#include "polyvm/cli/cli.hpp"

int main(int argc, char** argv) { return polyvm::cli::main_entry(argc, argv, std::cout, std::cerr); }
