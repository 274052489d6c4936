// SPDX-License-Identifier: Apache-2.0

#include "irshield/cli.hpp"

int main(int argc, char** argv) { return irshield::cli::run(argc, argv); }
