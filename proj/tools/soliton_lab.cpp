#include <iostream>
#include <string>
#include <vector>

#include "soliton_lab/cli/run.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return soliton_lab::cli::main_entry(std::move(args), std::cout, std::cerr);
}
