#include "wcg/cli.hpp"

int main(int argc, char** argv) { return wcg::cli::run(argc, argv); }
