#include "foelner/cli.hpp"

int main(int argc, char** argv) { return foelner::cli::run(argc, argv); }
