// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/cli.hpp"

int main(int argc, char** argv) { return pidgraph::dispatch(argc, argv); }
