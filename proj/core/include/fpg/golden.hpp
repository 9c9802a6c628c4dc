// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fpg/cost.hpp"

namespace fpg::golden {

/// One published reference figure: pyramid GFLOPs / MParams at 640x640
/// input for a named configuration of the RetinaNet 9@256 family (totals
/// rows are whole-detector numbers instead).
struct ReferenceRow {
  const char* name;
  double flops_g;
  double params_m;
};

/// Connection-family ablations: full, no_ad, no_au, no_su, no_as,
/// contracted.
const std::vector<ReferenceRow>& component_rows();
/// SameUp operator variants on the contracted default.
const std::vector<ReferenceRow>& same_up_rows();
/// AcrossSkip operator variants on the contracted default.
const std::vector<ReferenceRow>& across_skip_rows();
/// AcrossDown operator variants on the contracted default.
const std::vector<ReferenceRow>& across_down_rows();
/// Whole-detector totals: fpn_1_256, fpg_9_128, fpg_9_256.
const std::vector<ReferenceRow>& total_rows();

/// Config behind a reference row name; throws std::invalid_argument for
/// unknown names.
ArchConfig reference_config(std::string_view name);

/// True for the one row evaluated with build_fpn instead of build_fpg.
bool is_fpn_row(std::string_view name);

struct CheckLine {
  std::string label;
  double expected = 0.0;  // G for FLOPs lines, M for params lines
  double actual = 0.0;
  double rel_err = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ReferenceCheckResult {
  std::vector<CheckLine> lines;
  bool all_pass = true;
};

/// Reproduction check used by `fpg cost --check`: every reference figure
/// within 5% relative error, and the headline cost deltas (full vs no_au,
/// no_au vs contracted, and the operator-variant gaps) within 10%.
ReferenceCheckResult reference_check(int h = 640, int w = 640);

}  // namespace fpg::golden
