#include <iostream>

#include "dclab/cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dclab::cli::run(args, std::cout, std::cerr);
}
