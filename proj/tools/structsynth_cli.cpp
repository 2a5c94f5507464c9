#include <iostream>
#include <string>
#include <vector>

#include "structsynth/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return structsynth::cli::run(args, std::cout, std::cerr);
}
