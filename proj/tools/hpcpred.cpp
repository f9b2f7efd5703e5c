#include <iostream>

#include "hpcpred/cli.hpp"

int main(int argc, char** argv) { return hpcpred::run_cli(argc, argv, std::cout, std::cerr); }
