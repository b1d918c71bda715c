#pragma once

// Closed-form flop counts of the three reanalysis methods and the ratio
// sweeps built on them.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace reanalysis {

// Exact integer flop counts; 128 bits so n ~ 1e6 does not overflow.
using FlopCount = unsigned __int128;

std::string to_string(FlopCount value);
double to_double(FlopCount value);

struct FlopQuery {
  std::uint64_t n = 1;
  std::uint64_t q = 0;
  std::uint64_t k = 0;
};

FlopCount flops_sri(std::uint64_t n, std::uint64_t q, std::uint64_t k);
FlopCount flops_pcg(std::uint64_t n, std::uint64_t k);
FlopCount flops_fdp(std::uint64_t n, std::uint64_t q);

enum class SweepMode { SriVsPcg, SriVsFdp };

struct RatioSeries {
  std::string label;
  double parameter = 0.0;
  std::vector<double> ratios;
};

struct RatioSweep {
  SweepMode mode = SweepMode::SriVsPcg;
  std::vector<double> axis;
  std::vector<RatioSeries> series;
};

// SriVsPcg: axis is q/n, parameters are k_s (k = k_s q for SRI, k_s n for PCG).
// SriVsFdp: axis is k/q, parameters are q/n.
RatioSweep ratio_sweep(SweepMode mode, std::uint64_t n, const std::vector<double>& axis,
                       const std::vector<double>& parameters);

// Evenly spaced axis, both ends included.
std::vector<double> linear_axis(double first, double last, int points);

// Columns: x, series_label, ratio.
void write_csv(std::ostream& out, const RatioSweep& sweep);

double relative_time(double t_reanalysis, double t_conventional);

}  // namespace reanalysis
