#include <iostream>

#include "frogsim_cli.hpp"

int main(int argc, char** argv) {
  return frogsim::cli::run_cli(argc, argv, std::cout, std::cerr);
}
