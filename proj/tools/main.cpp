#include "shl0/cli.hpp"

int main(int argc, char** argv) { return shl0::run_cli(argc, argv); }
