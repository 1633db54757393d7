#include "adp/cli/app.hpp"

#include <iostream>

int main(int argc, char** argv) { return adp::cli::run(argc, argv, std::cout, std::cerr); }
