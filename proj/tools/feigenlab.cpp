#include "feigen/cli.hpp"

int main(int argc, char** argv) { return feigen::cli_dispatch(argc, argv); }
