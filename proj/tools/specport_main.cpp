#include <iostream>

#include "specport/cli.hpp"

int main(int argc, char** argv) { return specport::cli::run(argc, argv, std::cout, std::cerr); }
