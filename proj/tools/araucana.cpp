#include "araucana/cli.hpp"

int main(int argc, char** argv) { return araucana::cli::run(argc, argv); }
