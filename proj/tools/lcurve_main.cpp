#include <iostream>
#include <string>
#include <vector>

#include "lcurve/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return lcurve::cli::main(args, std::cout, std::cerr);
}
