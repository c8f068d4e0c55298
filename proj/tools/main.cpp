#include <iostream>

#include "rankwise/cli.hpp"

int main(int argc, char** argv) { return rankwise::run_cli(argc, argv, std::cout, std::cerr); }
