#include "nlsplit/cli_io.hpp"

int main(int argc, char** argv) { return nlsplit::cli_main(argc, argv); }
