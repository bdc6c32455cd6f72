#include "ecdl/cli.hpp"

int main(int argc, char** argv) { return ecdl::cli::run(argc, argv); }
