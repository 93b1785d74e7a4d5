#include <iostream>

#include "flagint/cli.hpp"

int main(int argc, char** argv) { return flagint::run_cli(argc, argv, std::cout, std::cerr); }
