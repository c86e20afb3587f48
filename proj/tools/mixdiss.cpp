#include "mixdiss/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mixdiss::run_cli(argc, argv, std::cout, std::cerr); }
