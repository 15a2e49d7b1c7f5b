#include <iostream>
#include <string>
#include <vector>

#include "chaos_anneal/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return chaos_anneal::cli::run(args, std::cout, std::cerr);
}
