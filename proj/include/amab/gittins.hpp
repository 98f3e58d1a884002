#pragma once

#include <filesystem>
#include <memory>
#include <vector>

namespace amab {

// Gittins indices for a Bernoulli arm with a Beta(alpha, beta) posterior and
// discount gamma, stored for integer states with alpha, beta >= 1 and
// alpha + beta <= cap. Other states fall back to the posterior mean.
class GittinsTable {
 public:
  GittinsTable(double gamma, int cap, double tolerance, std::vector<double> values);

  double gamma() const { return gamma_; }
  int cap() const { return cap_; }
  double tolerance() const { return tolerance_; }

  bool contains(double alpha, double beta) const;
  double index(double alpha, double beta) const;

  // Text format, one state per line after a two-line header:
  //   # amab gittins table v1
  //   gamma <g> cap <c> tolerance <t>
  //   <alpha> <beta> <index>
  // Numbers are written with 17 significant digits; rows are ordered by
  // alpha + beta, then alpha.
  void save(const std::filesystem::path& path) const;
  static GittinsTable load(const std::filesystem::path& path);

 private:
  static std::size_t slot(int alpha, int beta);

  double gamma_;
  int cap_;
  double tolerance_;
  std::vector<double> values_;
};

// Calibration: for each state, bisect on the retirement reward lambda until
// continuing from the state is worth exactly lambda / (1 - gamma). The
// continuation value is computed by backward induction truncated at a depth
// where gamma^depth < tolerance.
GittinsTable compute_gittins_table(double gamma, int cap, double tolerance);

// Index of a single state by the same calibration.
double gittins_index(int alpha, int beta, double gamma, double tolerance);

// Loads the table from `cache_dir` if a file for (gamma, cap, tolerance)
// exists there, otherwise computes and writes it.
std::shared_ptr<const GittinsTable> load_or_compute_gittins_table(
    const std::filesystem::path& cache_dir, double gamma, int cap, double tolerance);

// Process-wide memo on top of load_or_compute_gittins_table.
std::shared_ptr<const GittinsTable> shared_gittins_table(double gamma, int cap = 200,
                                                         double tolerance = 1e-7);

}  // namespace amab
