#include <iostream>
#include <string>
#include <vector>

#include "handsmooth/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return handsmooth::cli::run(args, std::cout, std::cerr);
}
