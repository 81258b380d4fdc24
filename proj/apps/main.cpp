// main.cpp
// Entry point of the bsisac command-line tool.
//
// SPDX-License-Identifier: MIT
// Copyright (c) 2026 bsisac contributors. See LICENSE for details.

#include <iostream>
#include <string>
#include <vector>

#include "bsisac/cli_io.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return bsisac::io::run_command(args, std::cout, std::cerr);
}
