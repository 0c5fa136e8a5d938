#include "tssd/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return tssd::run_cli(argc, argv, std::cout, std::cerr); }
