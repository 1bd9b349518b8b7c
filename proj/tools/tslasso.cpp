#include "tslasso/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return tslasso::run_cli(argc, argv, std::cout, std::cerr); }
