#include <iostream>

#include "ncsd/cli.hpp"

int main(int argc, char** argv) { return ncsd::run_cli(argc, argv, std::cout, std::cerr); }
