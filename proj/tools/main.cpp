#include "sweeplio/cli.hpp"

int main(int argc, char** argv) { return sweeplio::cli_main(argc, argv); }
