#include "reanalysis/costmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "reanalysis/errors.hpp"

namespace reanalysis {

std::string to_string(FlopCount value) {
  if (value == 0) return "0";
  std::string digits;
  while (value > 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
    value /= 10;
  }
  std::reverse(digits.begin(), digits.end());
  return digits;
}

double to_double(FlopCount value) { return static_cast<double>(value); }

FlopCount flops_sri(std::uint64_t n64, std::uint64_t q64, std::uint64_t k64) {
  const FlopCount n = n64, q = q64, k = k64;
  return k * (6 * q * q + 8 * n * q + 2 * n + 16 * q + 2) + 2 * n * n + 4 * q * q + 10 * n * q + 4 * n + 2 * q;
}

FlopCount flops_pcg(std::uint64_t n64, std::uint64_t k64) {
  const FlopCount n = n64, k = k64;
  return k * (6 * n * n + 14 * n + 2) + 4 * n * n + n;
}

FlopCount flops_fdp(std::uint64_t n64, std::uint64_t q64) {
  const FlopCount n = n64, q = q64;
  return 2 * n * q * q + q * q * q + 2 * n * n + 2 * q * q + 6 * n * q + 3 * n + 2 * q;
}

namespace {

std::uint64_t scaled(double ratio, double base) {
  return static_cast<std::uint64_t>(std::llround(ratio * base));
}

std::string label_for(SweepMode mode, double parameter) {
  char buf[64];
  std::snprintf(buf, sizeof buf, mode == SweepMode::SriVsPcg ? "k_s=%g" : "q/n=%g", parameter);
  return buf;
}

}  // namespace

RatioSweep ratio_sweep(SweepMode mode, std::uint64_t n, const std::vector<double>& axis,
                       const std::vector<double>& parameters) {
  if (n == 0) throw Error(ErrorKind::InvalidParameter, "n must be positive");
  RatioSweep sweep;
  sweep.mode = mode;
  sweep.axis = axis;
  const double nd = static_cast<double>(n);
  for (double parameter : parameters) {
    RatioSeries series;
    series.label = label_for(mode, parameter);
    series.parameter = parameter;
    for (double x : axis) {
      if (mode == SweepMode::SriVsPcg) {
        const std::uint64_t q = scaled(x, nd);
        const auto sri = flops_sri(n, q, scaled(parameter, static_cast<double>(q)));
        const auto pcg = flops_pcg(n, scaled(parameter, nd));
        series.ratios.push_back(to_double(sri) / to_double(pcg));
      } else {
        const std::uint64_t q = scaled(parameter, nd);
        const auto sri = flops_sri(n, q, scaled(x, static_cast<double>(q)));
        series.ratios.push_back(to_double(sri) / to_double(flops_fdp(n, q)));
      }
    }
    sweep.series.push_back(std::move(series));
  }
  return sweep;
}

std::vector<double> linear_axis(double first, double last, int points) {
  if (points < 1) throw Error(ErrorKind::InvalidParameter, "axis needs at least one point");
  std::vector<double> axis;
  axis.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    axis.push_back(points == 1 ? first : first + (last - first) * i / (points - 1));
  }
  return axis;
}

void write_csv(std::ostream& out, const RatioSweep& sweep) {
  out << "x,series_label,ratio\n";
  char buf[64];
  for (const auto& series : sweep.series) {
    for (std::size_t i = 0; i < sweep.axis.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.6g,", sweep.axis[i]);
      out << buf << series.label;
      std::snprintf(buf, sizeof buf, ",%.17g\n", series.ratios[i]);
      out << buf;
    }
  }
}

double relative_time(double t_reanalysis, double t_conventional) {
  if (!(t_conventional > 0.0)) {
    throw Error(ErrorKind::InvalidMeasurement, "conventional time must be positive");
  }
  return t_reanalysis / t_conventional;
}

}  // namespace reanalysis
