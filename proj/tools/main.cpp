#include "mctrl/cli.hpp"

int main(int argc, char** argv) { return mctrl::cli_main(argc, argv); }
