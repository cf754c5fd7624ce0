#include "gdglmm/cli.hpp"

int main(int argc, char** argv) { return gdglmm::cli::run(argc, argv); }
