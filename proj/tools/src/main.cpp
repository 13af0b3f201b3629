#include <iostream>

#include "tnc/cli/cli.hpp"

int main(int argc, char** argv) {
  return tnc::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
