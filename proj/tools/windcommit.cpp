#include <iostream>

#include "windcommit/cli.hpp"

int main(int argc, char** argv) { return windcommit::cli_main(argc, argv, std::cout, std::cerr); }
