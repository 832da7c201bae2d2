#include <nucbound/cli.hpp>

#include <iostream>

int main(int argc, char** argv) { return nucbound::cli::run(argc, argv, std::cout, std::cerr); }
