#include "hisense/cli/commands.hpp"

int main(int argc, char** argv) { return hisense::cli::run(argc, argv); }
