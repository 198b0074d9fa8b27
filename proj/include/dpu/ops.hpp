#pragma once

#include <cstdint>

namespace dpu {

struct OpsReport {
  double ops_per_pass = 0;
  double ops_per_second = 0;
  double ops_per_mm2_s = 0;   // 0 when no area given
  double ops_per_watt = 0;    // 0 when no power given
};

// One diffractive layer connecting H*W inputs to H*W outputs performs
// 2*(H*W)^2 operations per pass (a multiply and an add per connection).
OpsReport freespace_ops(std::int64_t rows, std::int64_t cols, double frame_rate_hz,
                        double area_mm2 = 0, double power_w = 0);

// A metaline executing an n_in x n_out weight matrix: 2*n_in*n_out ops.
OpsReport integrated_ops(int n_in, int n_out, double rate_hz, double area_mm2 = 0,
                         double power_w = 0);

}  // namespace dpu
