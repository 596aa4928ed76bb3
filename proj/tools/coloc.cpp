#include <iostream>

#include "coloc/cli.hpp"

int main(int argc, char** argv) { return coloc::cli::run(argc, argv, std::cout, std::cerr); }
