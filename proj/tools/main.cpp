// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return soiv::cli::run(argc, argv, std::cout, std::cerr); }
