#include "snar_cli/cli.hpp"

int main(int argc, char** argv) { return snar::cli::cli_dispatch(argc, argv); }
