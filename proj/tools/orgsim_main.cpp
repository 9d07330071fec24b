#include <iostream>

#include "orgsim/cli.hpp"

int main(int argc, char** argv) {
  return orgsim::cli::run_cli(argc, argv, std::cout, std::cerr);
}
