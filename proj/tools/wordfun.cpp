#include <iostream>

#include "wordfun/cli.hpp"

int main(int argc, char** argv) { return wordfun::cli::run(argc, argv, std::cout, std::cerr); }
