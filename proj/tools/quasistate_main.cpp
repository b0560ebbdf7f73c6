#include "qs/cli.hpp"

int main(int argc, char** argv) {
  return qs::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
