#include "nlspde/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return nlspde::run_cli(argc, argv, std::cout, std::cerr); }
