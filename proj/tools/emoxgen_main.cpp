#include "emoxgen/cli.hpp"

int main(int argc, char** argv) { return emoxgen::cli::dispatch(argc, argv); }
