#include <string>
#include <vector>

#include "imair/cli.hpp"

int main(int argc, char** argv) {
  return imair::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
