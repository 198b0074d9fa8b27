#include "dpu/ops.hpp"

#include <stdexcept>

namespace dpu {

namespace {

OpsReport report_from(double ops, double rate_hz, double area_mm2, double power_w) {
  if (rate_hz < 0) throw std::invalid_argument("ops: negative rate");
  OpsReport r;
  r.ops_per_pass = ops;
  r.ops_per_second = ops * rate_hz;
  if (area_mm2 > 0) r.ops_per_mm2_s = r.ops_per_second / area_mm2;
  if (power_w > 0) r.ops_per_watt = r.ops_per_second / power_w;
  return r;
}

}  // namespace

OpsReport freespace_ops(std::int64_t rows, std::int64_t cols, double frame_rate_hz,
                        double area_mm2, double power_w) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("ops: non-positive dimensions");
  const double n = double(rows) * double(cols);
  return report_from(2.0 * n * n, frame_rate_hz, area_mm2, power_w);
}

OpsReport integrated_ops(int n_in, int n_out, double rate_hz, double area_mm2, double power_w) {
  if (n_in <= 0 || n_out <= 0) throw std::invalid_argument("ops: non-positive dimensions");
  return report_from(2.0 * n_in * n_out, rate_hz, area_mm2, power_w);
}

}  // namespace dpu
