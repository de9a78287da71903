// Builds the quantile table for the integral of a squared Brownian bridge,
// the limit law of the Cramer-von Mises statistic.  One bridge per replicate,
// discretised on a uniform grid; quantiles of the sorted sample are written as
// a CSV artifact and, optionally, as an embeddable C++ source file.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "relvar/rng.h"

namespace {

std::string meta_line(long bridges, long grid, std::uint64_t seed) {
  return "bridges=" + std::to_string(bridges) + " grid=" + std::to_string(grid) +
         " seed=" + std::to_string(seed) + " version=1";
}

}  // namespace

int main(int argc, char** argv) {
  long bridges = 1000000;
  long grid = 10000;
  std::uint64_t seed = 424243;
  std::string csv_path = "data/cvm_quantiles.csv";
  std::string source_path;

  CLI::App app{"generate the Cramer-von Mises limit quantile table"};
  app.add_option("--bridges", bridges, "number of simulated bridges")->check(CLI::PositiveNumber);
  app.add_option("--grid", grid, "grid points per bridge")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "rng seed");
  app.add_option("--csv", csv_path, "output CSV path");
  app.add_option("--source", source_path, "also emit an embeddable C++ source file");
  CLI11_PARSE(app, argc, argv);

  const double g = double(grid);
  const double sqrt_h = std::sqrt(1.0 / g);
  std::vector<double> omega2(static_cast<std::size_t>(bridges));

  for (long rep = 0; rep < bridges; ++rep) {
    relvar::RngStream rng(seed, std::uint64_t(rep));
    // single pass: sum W_i^2, sum i W_i, and W_G give the bridge integral
    long double s1 = 0.0L, s2 = 0.0L;
    double w = 0.0;
    for (long i = 1; i <= grid; ++i) {
      w += sqrt_h * rng.next_normal();
      s1 += (long double)(w) * w;
      s2 += (long double)(i)*w;
    }
    const long double wg = w;
    const long double bridge_sum =
        s1 - 2.0L * wg / g * s2 + wg * wg * (g + 1.0L) * (2.0L * g + 1.0L) / (6.0L * g);
    omega2[static_cast<std::size_t>(rep)] = double(bridge_sum / g);
    if (rep % 100000 == 0) std::cerr << "bridge " << rep << "/" << bridges << "\n";
  }

  std::sort(omega2.begin(), omega2.end());

  const int res = 10000;
  std::vector<double> q(static_cast<std::size_t>(res - 1));
  for (int j = 1; j < res; ++j) {
    const double pos = (double(j) / res) * double(bridges - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - double(lo);
    q[std::size_t(j - 1)] = omega2[lo] + frac * (omega2[lo + 1] - omega2[lo]);
  }

  const std::string meta = meta_line(bridges, grid, seed);
  {
    std::ofstream out(csv_path);
    if (!out) {
      std::cerr << "cannot write " << csv_path << "\n";
      return 1;
    }
    out << "# cvm-quantile-table " << meta << "\n";
    out << "# statistic: int_0^1 (brownian bridge)^2 dt, discretised on the grid\n";
    out << "# columns: u,quantile\n";
    char buf[64];
    for (int j = 1; j < res; ++j) {
      std::snprintf(buf, sizeof buf, "%.4f,%.17g\n", double(j) / res, q[std::size_t(j - 1)]);
      out << buf;
    }
  }

  if (!source_path.empty()) {
    std::ofstream out(source_path);
    if (!out) {
      std::cerr << "cannot write " << source_path << "\n";
      return 1;
    }
    out << "// Generated by gen_cvm_table; do not edit.\n";
    out << "// " << meta << "\n\n";
    out << "#include <cstddef>\n\n";
    out << "namespace relvar::detail {\n\n";
    out << "extern const char kCvmTableMeta[] = \"" << meta << "\";\n";
    out << "extern const std::size_t kCvmQuantileCount = " << q.size() << ";\n";
    out << "extern const double kCvmQuantiles[] = {\n";
    char buf[64];
    for (std::size_t j = 0; j < q.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,", q[j]);
      out << buf << (j % 4 == 3 ? "\n" : " ");
    }
    out << "};\n\n}  // namespace relvar::detail\n";
  }

  std::printf("quantiles: 50%% %.6f  90%% %.6f  95%% %.6f  99%% %.6f\n", q[4999], q[8999],
              q[9499], q[9899]);
  return 0;
}
