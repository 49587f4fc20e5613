// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#include "commands.hpp"

int main(int argc, char** argv) {
    return jslol::cli::run(argc, argv);
}
