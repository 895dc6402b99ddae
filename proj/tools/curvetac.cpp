#include <iostream>

#include "curvetac/cli.hpp"

int main(int argc, char** argv) { return curvetac::run_cli(argc, argv, std::cout, std::cerr); }
