#include "sspec/cli.hpp"

int main(int argc, char** argv) { return sspec::cli::main(argc, argv); }
