#include <iostream>

#include <copulaeda_cli/cli.hpp>

int main(int argc, char** argv)
{
  return copulaeda::cli::run(argc, argv, std::cout, std::cerr);
}
