#include <vector>

#include "netid/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return netid::run_cli(args);
}
