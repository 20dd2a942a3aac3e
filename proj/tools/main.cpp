#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return seqei::cli::run(argc, argv, std::cout, std::cerr); }
