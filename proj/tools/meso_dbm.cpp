#include "meso/cli.hpp"

int main(int argc, char** argv) { return meso::cli::main_entry(argc, argv); }
