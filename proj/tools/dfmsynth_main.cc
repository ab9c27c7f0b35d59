#include <iostream>

#include "dfmsynth/cli.h"

int main(int argc, char** argv) { return dfmsynth::run_cli(argc, argv, std::cout, std::cerr); }
