#include <iostream>
#include <string>
#include <vector>

#include "twnls/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return twnls::cli_main(args, std::cout, std::cerr);
}
