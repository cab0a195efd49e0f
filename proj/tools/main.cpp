#include "klab/cli.hpp"

int main(int argc, char** argv) {
  return klab::cli::run_main(argc, argv);
}
