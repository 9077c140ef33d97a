/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include <iostream>

#include "fithand/cli.hpp"

int main(int argc, char** argv) { return fithand::run(argc, argv, std::cout, std::cerr); }
