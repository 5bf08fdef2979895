#include "flowdir/cli.hpp"

int main(int argc, char** argv) { return flowdir::cli_main(argc, argv); }
