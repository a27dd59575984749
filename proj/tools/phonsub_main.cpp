#include "phonsub/cli/commands.hpp"

int main(int argc, char** argv) { return phonsub::cli::run(argc, argv); }
