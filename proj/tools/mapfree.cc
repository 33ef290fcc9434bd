#include "mapfree/cli/commands.h"

int main(int argc, char** argv) { return mapfree::RunCli(argc, argv); }
