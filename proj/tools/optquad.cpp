#include "optquad/cli.hpp"

int main(int argc, char** argv) { return optquad::cli::run(argc, argv); }
