#include <iostream>

#include "detach/harness.hpp"

int main(int argc, char** argv) {
  return detach::harness::cli_main(argc, argv, std::cout, std::cerr);
}
