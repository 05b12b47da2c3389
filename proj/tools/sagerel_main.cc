#include <iostream>

#include "sagerel/cli/commands.h"

int main(int argc, char** argv) {
  return sagerel::cli::RunCli(argc, argv, std::cout, std::cerr);
}
