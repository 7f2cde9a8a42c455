#include <iostream>

#include "probmusic/cli.hpp"

int main(int argc, char** argv) { return probmusic::run_cli(argc, argv, std::cout, std::cerr); }
