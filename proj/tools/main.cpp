#include <iostream>

#include "grad2/cli.hpp"

int main(int argc, char** argv) { return grad2::cli::main_entry(argc, argv, std::cout, std::cerr); }
