#include <iostream>
#include <string>
#include <vector>

#include "delaysched/cli.hpp"

int main(int argc, char** argv) {
  return delaysched::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
