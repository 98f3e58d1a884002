#include "amab/gittins.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

namespace amab {
namespace {

int truncation_depth(double gamma, double tolerance) {
  return static_cast<int>(std::ceil(std::log(tolerance) / std::log(gamma))) + 1;
}

// Value of the optimal stopping problem "continue sampling the arm or retire
// forever on lambda per step", started at (alpha, beta), minus the retirement
// value. Positive means continuing is strictly better.
double continuation_advantage(int alpha, int beta, double gamma, double lambda, int depth,
                              std::vector<double>& next, std::vector<double>& cur) {
  const double retire = lambda / (1.0 - gamma);
  next.assign(static_cast<std::size_t>(depth) + 1, 0.0);
  const double n_root = alpha + beta;
  for (int i = 0; i <= depth; ++i) {
    const double mean = (alpha + i) / (n_root + depth);
    next[static_cast<std::size_t>(i)] = std::max(lambda, mean) / (1.0 - gamma);
  }
  for (int d = depth - 1; d >= 0; --d) {
    cur.assign(static_cast<std::size_t>(d) + 1, 0.0);
    const double n = n_root + d;
    for (int i = 0; i <= d; ++i) {
      const double p = (alpha + i) / n;
      const double go = p * (1.0 + gamma * next[static_cast<std::size_t>(i) + 1]) +
                        (1.0 - p) * gamma * next[static_cast<std::size_t>(i)];
      cur[static_cast<std::size_t>(i)] = d == 0 ? go : std::max(retire, go);
    }
    std::swap(next, cur);
  }
  return next[0] - retire;
}

std::string cache_file_name(double gamma, int cap, double tolerance) {
  std::ostringstream os;
  os << "gittins_g" << std::setprecision(10) << gamma << "_c" << cap << "_t" << tolerance
     << ".txt";
  return os.str();
}

}  // namespace

GittinsTable::GittinsTable(double gamma, int cap, double tolerance, std::vector<double> values)
    : gamma_(gamma), cap_(cap), tolerance_(tolerance), values_(std::move(values)) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gittins: gamma must be in (0,1)");
  if (cap < 2) throw std::invalid_argument("gittins: cap must be at least 2");
  const auto expected = static_cast<std::size_t>(cap - 1) * static_cast<std::size_t>(cap) / 2;
  if (values_.size() != expected) throw std::invalid_argument("gittins: table size mismatch");
}

std::size_t GittinsTable::slot(int alpha, int beta) {
  const auto s = static_cast<std::size_t>(alpha + beta);
  return (s - 2) * (s - 1) / 2 + static_cast<std::size_t>(alpha - 1);
}

bool GittinsTable::contains(double alpha, double beta) const {
  if (alpha < 1.0 || beta < 1.0) return false;
  if (alpha != std::floor(alpha) || beta != std::floor(beta)) return false;
  return alpha + beta <= cap_;
}

double GittinsTable::index(double alpha, double beta) const {
  if (!contains(alpha, beta)) return alpha / (alpha + beta);
  return values_[slot(static_cast<int>(alpha), static_cast<int>(beta))];
}

void GittinsTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write gittins table: " + path.string());
  out << "# amab gittins table v1\n";
  out << std::setprecision(17) << "gamma " << gamma_ << " cap " << cap_ << " tolerance "
      << tolerance_ << "\n";
  for (int s = 2; s <= cap_; ++s) {
    for (int a = 1; a < s; ++a) {
      out << a << ' ' << (s - a) << ' ' << values_[slot(a, s - a)] << '\n';
    }
  }
  if (!out) throw std::runtime_error("failed writing gittins table: " + path.string());
}

GittinsTable GittinsTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read gittins table: " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "# amab gittins table v1") {
    throw std::runtime_error("bad gittins table header in " + path.string());
  }
  std::string w1, w2, w3;
  double gamma = 0.0;
  double tolerance = 0.0;
  int cap = 0;
  if (!(in >> w1 >> gamma >> w2 >> cap >> w3 >> tolerance) || w1 != "gamma" || w2 != "cap" ||
      w3 != "tolerance" || cap < 2) {
    throw std::runtime_error("bad gittins table parameters in " + path.string());
  }
  std::vector<double> values(static_cast<std::size_t>(cap - 1) * static_cast<std::size_t>(cap) / 2,
                             -1.0);
  int a = 0;
  int b = 0;
  double v = 0.0;
  std::size_t rows = 0;
  while (in >> a >> b >> v) {
    if (a < 1 || b < 1 || a + b > cap) throw std::runtime_error("gittins table row out of range");
    values[slot(a, b)] = v;
    ++rows;
  }
  if (rows != values.size()) throw std::runtime_error("gittins table is incomplete: " + path.string());
  return GittinsTable(gamma, cap, tolerance, std::move(values));
}

double gittins_index(int alpha, int beta, double gamma, double tolerance) {
  if (alpha < 1 || beta < 1) throw std::invalid_argument("gittins_index: state must be >= (1,1)");
  const int depth = truncation_depth(gamma, tolerance);
  std::vector<double> next;
  std::vector<double> cur;
  double lo = static_cast<double>(alpha) / (alpha + beta);
  double hi = 1.0;
  while (hi - lo > 0.25 * tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (continuation_advantage(alpha, beta, gamma, mid, depth, next, cur) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

GittinsTable compute_gittins_table(double gamma, int cap, double tolerance) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gittins: gamma must be in (0,1)");
  if (cap < 2) throw std::invalid_argument("gittins: cap must be at least 2");
  if (!(tolerance > 0.0 && tolerance < 1.0)) {
    throw std::invalid_argument("gittins: tolerance must be in (0,1)");
  }
  std::vector<double> values(static_cast<std::size_t>(cap - 1) * static_cast<std::size_t>(cap) / 2);
  for (int s = 2; s <= cap; ++s) {
    for (int a = 1; a < s; ++a) {
      values[(static_cast<std::size_t>(s) - 2) * (static_cast<std::size_t>(s) - 1) / 2 +
             static_cast<std::size_t>(a - 1)] = gittins_index(a, s - a, gamma, tolerance);
    }
  }
  return GittinsTable(gamma, cap, tolerance, std::move(values));
}

std::shared_ptr<const GittinsTable> load_or_compute_gittins_table(
    const std::filesystem::path& cache_dir, double gamma, int cap, double tolerance) {
  const auto path = cache_dir / cache_file_name(gamma, cap, tolerance);
  if (std::filesystem::exists(path)) {
    try {
      auto t = GittinsTable::load(path);
      if (t.cap() == cap && t.gamma() == gamma && t.tolerance() == tolerance) {
        return std::make_shared<const GittinsTable>(std::move(t));
      }
    } catch (const std::exception&) {
      // Unreadable cache entries are recomputed below.
    }
  }
  auto table = std::make_shared<const GittinsTable>(compute_gittins_table(gamma, cap, tolerance));
  std::error_code ec;
  std::filesystem::create_directories(cache_dir, ec);
  if (!ec) {
    const auto tmp = path.string() + ".tmp";
    try {
      table->save(tmp);
      std::filesystem::rename(tmp, path, ec);
    } catch (const std::exception&) {
      std::filesystem::remove(tmp, ec);
    }
  }
  return table;
}

std::shared_ptr<const GittinsTable> shared_gittins_table(double gamma, int cap, double tolerance) {
  static std::mutex mu;
  static std::map<std::tuple<double, int, double>, std::shared_ptr<const GittinsTable>> memo;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(gamma, cap, tolerance);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  std::filesystem::path dir;
  if (const char* env = std::getenv("AMAB_CACHE_DIR"); env != nullptr && *env != '\0') {
    dir = env;
  } else {
    dir = std::filesystem::temp_directory_path() / "amab_cache";
  }
  auto table = load_or_compute_gittins_table(dir, gamma, cap, tolerance);
  memo.emplace(key, table);
  return table;
}

}  // namespace amab
