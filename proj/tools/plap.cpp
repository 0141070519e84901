#include <iostream>

#include "plap/commands.hpp"

int main(int argc, char** argv) { return plap::cli::run(argc, argv, std::cout, std::cerr); }
