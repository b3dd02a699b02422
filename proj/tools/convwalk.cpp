#include "convwalk/cli.hpp"

int main(int argc, char** argv) { return convwalk::cli::main(argc, argv); }
