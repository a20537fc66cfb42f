#include <iostream>

#include "lobforge/cli.hpp"

int main(int argc, char** argv) { return lobforge::run(argc, argv, std::cout, std::cerr); }
