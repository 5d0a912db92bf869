#include "cli/commands.hpp"

int main(int argc, char** argv) { return eventflow::cli::run_cli(argc, argv); }
