// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

#include "bispin/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return bispin::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
