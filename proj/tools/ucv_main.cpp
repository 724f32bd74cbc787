#include "ucv/cli/cli.hpp"

int main(int argc, char** argv) { return ucv::cli::main_entry(argc, argv); }
