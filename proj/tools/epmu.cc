#include <unistd.h>

#include <cstdlib>
#include <iostream>

#include "epmu/cli.hh"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  epmu::CliEnvironment env;
  env.color = isatty(STDOUT_FILENO) && !std::getenv("NO_COLOR");
  return epmu::runCli(args, std::cout, std::cerr, env);
}
