#include "imave/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return imave::run_cli(argc, argv, std::cout, std::cerr); }
