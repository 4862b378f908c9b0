#include "nrdc/cli.hpp"

int main(int argc, char** argv) { return nrdc::cli::run_command(argc, argv); }
