#include "ncmart/cli.hpp"

int main(int argc, char** argv) { return ncmart::cli_main(argc, argv); }
