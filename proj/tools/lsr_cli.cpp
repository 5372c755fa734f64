#include "lsr/cli.hpp"

int main(int argc, char** argv) { return lsr::run_cli(argc, argv); }
