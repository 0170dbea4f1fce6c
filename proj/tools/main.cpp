#include <vector>

#include "delaylattice/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dlat::run_cli(args);
}
