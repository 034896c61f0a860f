#include "cli_app.hpp"

int main(int argc, char** argv) {
  return pinstat::cli::run_cli(argc, argv, std::cout, std::cerr, std::cin);
}
