#include "kbcrane/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return kbcrane::run_cli(argc, argv, std::cout, std::cerr); }
