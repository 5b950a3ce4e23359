#include <iostream>
#include <string>
#include <vector>

#include "hogsvd/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return hogsvd::cli::run(args, std::cout, std::cerr);
}
