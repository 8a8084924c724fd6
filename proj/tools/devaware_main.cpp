#include "devaware/cli.hpp"

int main(int argc, char** argv) { return devaware::cli::run(argc, argv); }
