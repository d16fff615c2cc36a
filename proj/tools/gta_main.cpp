#include "gta/cli.hpp"

int main(int argc, char** argv) { return gta::cli::run(argc, argv); }
