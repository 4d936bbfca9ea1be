#include "nchs/cli.hpp"

int main(int argc, char** argv) { return nchs::cli::run(argc, argv); }
