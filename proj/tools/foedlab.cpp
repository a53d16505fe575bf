#include "foedlab/cli.hpp"

int main(int argc, char** argv) { return foedlab::run_cli(argc, argv); }
