#include <iostream>

#include "qbayes/cli.hpp"

int main(int argc, char** argv) {
  return qbayes::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
