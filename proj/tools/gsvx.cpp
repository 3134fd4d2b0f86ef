#include "gsvx/cli.hpp"

int main(int argc, char** argv) { return gsvx::cli_main(argc, argv); }
