#include "cli.hpp"

int main(int argc, char** argv) { return steklov::cli::main(argc, argv); }
