#include "qig/cli.hpp"

int main(int argc, char** argv) { return qig::cli::main(argc, argv); }
