// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "apdcorr/commands.hpp"

int main(int argc, char** argv) { return apdcorr::run_cli(argc, argv, std::cout, std::cerr); }
