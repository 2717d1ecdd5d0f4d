#include "ldplab_cli/commands.hpp"

int main(int argc, char** argv) { return ldplab::cli::run_cli(argc, argv); }
