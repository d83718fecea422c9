#include "onionlabel/cli.hpp"

int main(int argc, char** argv) { return onionlabel::cli::main(argc, argv); }
