#include <iostream>
#include <string>
#include <vector>

#include "kms_cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return kmscli::run_argv(std::move(args), std::cout);
}
