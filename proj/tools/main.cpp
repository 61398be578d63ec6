#include "cli.hpp"

int main(int argc, char** argv) { return namo::tools::run_cli(argc, argv); }
