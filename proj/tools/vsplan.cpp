#include <iostream>

#include "vsplan/cli.hpp"

int main(int argc, char** argv) { return vsplan::cli::run_cli(argc, argv, std::cout, std::cerr); }
