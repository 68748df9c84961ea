#include "vscale/cli.hpp"

int main(int argc, char** argv) { return vscale::cli::run(argc, argv); }
