#include <iostream>

#include "driftest/cli.hpp"

int main(int argc, char** argv) { return driftest::cli::run(argc, argv, std::cout, std::cerr); }
