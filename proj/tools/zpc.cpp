#include <iostream>

#include "zpc/cli.hpp"

int main(int argc, char** argv) { return zpc::cli::run(argc, argv, std::cout, std::cerr); }
