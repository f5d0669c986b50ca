#include "bestk/cli.hpp"

int main(int argc, char** argv) { return bestk::cli_dispatch(argc, argv); }
