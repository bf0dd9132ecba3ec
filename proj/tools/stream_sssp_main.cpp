#include "ssp/cli.hpp"

int main(int argc, char** argv) { return ssp::cli::run(argc, argv); }
