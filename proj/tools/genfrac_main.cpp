#include "genfrac/cli.hpp"

int main(int argc, char** argv) { return genfrac::cli::dispatch(argc, argv); }
