#include <iostream>
#include <string>
#include <vector>

#include "fitzcal/cli.hpp"

int main(int argc, char** argv) {
  return fitzcal::run_cli(std::vector<std::string>(argv, argv + argc),
                          std::cout, std::cerr);
}
