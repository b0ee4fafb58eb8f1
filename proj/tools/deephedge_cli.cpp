#include <iostream>

#include "deephedge/commands.hpp"

int main(int argc, char** argv) { return dh::run_cli(argc, argv, std::cout, std::cerr); }
