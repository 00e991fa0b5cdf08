#include "ilwlab/cli.hpp"

int main(int argc, char** argv) { return ilwlab::cli_main(argc, argv); }
