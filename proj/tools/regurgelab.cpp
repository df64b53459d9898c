#include <iostream>
#include <string>
#include <vector>

#include "rlab/cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return rlab::cli::dispatch(args, std::cout, std::cerr);
}
