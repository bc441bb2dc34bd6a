#include <iostream>
#include <string>
#include <vector>

#include "blowup_lab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return blowup_lab::dispatch(args, std::cout, std::cerr);
}
