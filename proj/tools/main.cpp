#include "sdde/cli.hpp"

int main(int argc, char** argv) { return sdde::cli::run(argc, argv); }
