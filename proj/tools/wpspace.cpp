// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wavepacket-spaces Authors

#include "cli.hpp"

int main(int argc, char** argv) { return wavepacket::cli::run(argc, argv); }
