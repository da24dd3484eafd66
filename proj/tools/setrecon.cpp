#include <iostream>

#include "setrecon/cli.hpp"

int main(int argc, char** argv) { return setrecon::cli::run(argc, argv, std::cout, std::cerr); }
