#include <string>
#include <vector>

#include "sar2rgb/cli/cli.hpp"

int main(int argc, char** argv) {
  return sar2rgb::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
