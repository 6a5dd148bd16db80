// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "medvlm/cli/cli.hpp"

int main(int argc, char** argv) { return medvlm::cli::run(argc, argv, std::cout, std::cerr); }
