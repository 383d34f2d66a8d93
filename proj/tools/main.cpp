#include <iostream>
#include <string>
#include <vector>

#include "cptrie/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cptrie::run_cli(args, std::cout, std::cerr);
}
