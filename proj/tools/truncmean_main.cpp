#include <iostream>

#include "truncmean/cli.hpp"

int main(int argc, char** argv) { return truncmean::run_cli(argc, argv, std::cout, std::cerr); }
