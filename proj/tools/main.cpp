#include "plab/cli.hpp"

int main(int argc, char** argv) { return plab::run_cli(argc, argv); }
