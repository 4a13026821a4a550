#include <iostream>

#include "igv/cli.hpp"

int main(int argc, char** argv) { return igv::cli::run(argc, argv, std::cout, std::cerr); }
