#include <iostream>

#include "carl/cli.hpp"

int main(int argc, char** argv) { return carl::cli::run(argc, argv, std::cout, std::cerr); }
