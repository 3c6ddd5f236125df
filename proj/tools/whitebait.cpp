#include <iostream>
#include <string>
#include <vector>

#include "whitebait/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return whitebait::run_cli(args, std::cout, std::cerr);
}
