#include <iostream>

#include "gsgi/interp/cli.hpp"

int main(int argc, char** argv) {
  return gsgi::interp::cli(argc, argv, std::cout, std::cerr);
}
