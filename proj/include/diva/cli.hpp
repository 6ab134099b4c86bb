// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "diva/trainer.hpp"

namespace diva {

/// Entry point behind the `diva` executable. `argv[0]` is the program name.
/// Subcommands: gen-data, pretrain, tune, eval, gradcheck, ablate.
/// Returns 0 only when the requested operation completed.
int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

/// "step,phase,loss,lr" header plus one line per row, '.' decimals, '\n'
/// line ends.
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricRow& row);

}  // namespace diva
