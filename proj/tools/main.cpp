// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return ctqw::cli::run(argc, argv, std::cout, std::cerr); }
