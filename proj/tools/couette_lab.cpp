#include "couette/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return couette::dispatch(argc, argv, std::cout, std::cerr); }
