#include "cli/experiment.hpp"

int main(int argc, char** argv) { return pdmp::cli::main(argc, argv); }
