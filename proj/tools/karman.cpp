#include "karman/cli.hpp"

int main(int argc, char **argv) { return karman::cli_main(argc, argv); }
