#include <iostream>

#include "hygraph/cli.hpp"

int main(int argc, char** argv) { return hygraph::cli::run(argc, argv, std::cout, std::cerr); }
