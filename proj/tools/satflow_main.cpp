#include <iostream>

#include "satflow/cli.hpp"

int main(int argc, char** argv) {
  return satflow::cli_main(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
