#include <iostream>
#include <string>
#include <vector>

#include "kstt/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return kstt::run_command(args, std::cout, std::cerr);
}
