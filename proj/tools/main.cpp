#include "hmsom/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return hmsom::run_cli(argc, argv, std::cout, std::cerr); }
