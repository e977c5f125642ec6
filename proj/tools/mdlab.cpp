#include <iostream>
#include <string>
#include <vector>

#include "mdlab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mdlab::dispatch(args, std::cout, std::cerr);
}
