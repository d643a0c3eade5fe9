#include "grand/cli.hpp"

int main(int argc, char** argv) { return grand::cli::main(argc, argv); }
