#include <iostream>

#include "episeg/cli.hpp"

int main(int argc, char** argv) { return episeg::run_command_line(argc, argv, std::cout, std::cerr); }
