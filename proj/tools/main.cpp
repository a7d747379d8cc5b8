#include <iostream>

#include "spt/cli.hpp"

int main(int argc, char** argv) { return spt::run_cli(argc, argv, std::cin, std::cout, std::cerr); }
