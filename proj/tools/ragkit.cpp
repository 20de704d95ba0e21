/**
 * @file ragkit.cpp
 * @brief Command-line entry point.
 */
#include "ragkit/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ragkit::cli_dispatch(argc, argv, std::cout, std::cerr); }
