#include <iostream>

#include "airsense/cli.hpp"

int main(int argc, char** argv) { return airsense::cli::run_cli(argc, argv, std::cout, std::cerr); }
