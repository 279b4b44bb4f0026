#include <iostream>

#include "dsm_cli/commands.hpp"

int main(int argc, char** argv) { return dsm::cli::main_entry(argc, argv, std::cout, std::cerr); }
