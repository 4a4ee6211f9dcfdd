#include "cli/commands.hpp"

int main(int argc, char** argv) { return unitsel::cli::run(argc, argv); }
