#include <iostream>

#include "iqp/cli.hpp"

int main(int argc, char** argv) { return iqp::cli::run(argc, argv, std::cout, std::cerr); }
