#include "epgp/dataset.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "epgp/errors.hpp"

namespace epgp {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kNoiseStream = 0x9e3779b97f4a7c15ULL;

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) {
      cell.pop_back();
    }
    std::size_t start = 0;
    while (start < cell.size() && cell[start] == ' ') ++start;
    out.push_back(cell.substr(start));
  }
  return out;
}

double parse_double(const std::string& s, const fs::path& path, long line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw LoadError(path.string() + ":" + std::to_string(line) +
                    ": cannot parse number '" + s + "'");
  }
  return v;
}

}  // namespace

bool Domain::empty() const { return !((upper - lower).array() > 0.0).all(); }

bool Domain::contains(const Eigen::Vector3d& p) const {
  return (p.array() >= lower.array()).all() &&
         (p.array() <= upper.array()).all();
}

fs::path metadata_path(const fs::path& data_path) {
  return fs::path(data_path.string() + ".meta.json");
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

void write_file_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
    out << text;
    if (!out) throw ConfigError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

Dataset generate_dataset(const TrueSolution& solution, int n,
                         const Domain& domain, double noise_std,
                         std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("dataset size must be at least 1");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw InvalidArgument("noise std must be finite and non-negative");
  }
  if (domain.empty()) throw ConfigError("dataset domain is empty");

  std::mt19937_64 point_rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Dataset data;
  data.points.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < 3; ++k) {
      data.points(i, k) =
          domain.lower(k) + (domain.upper(k) - domain.lower(k)) * unit(point_rng);
    }
  }
  data.values = solution.evaluate(data.points);
  if (noise_std > 0.0) {
    std::mt19937_64 noise_rng(seed ^ kNoiseStream);
    std::normal_distribution<double> normal(0.0, noise_std);
    for (int i = 0; i < n; ++i) data.values(i) += normal(noise_rng);
  }
  data.meta = {std::string(solution.name()), noise_std, seed, domain};
  return data;
}

void save_dataset(const Dataset& data, const fs::path& path) {
  std::string text = "x,y,t,Y\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      text += format_double(data.points(i, k));
      text += ',';
    }
    text += format_double(data.values(i));
    text += '\n';
  }
  nlohmann::ordered_json meta;
  meta["solution"] = data.meta.solution_id;
  meta["noise_std"] = data.meta.noise_std;
  meta["seed"] = data.meta.seed;
  meta["n"] = data.size();
  meta["domain_lower"] = {data.meta.domain.lower(0), data.meta.domain.lower(1),
                          data.meta.domain.lower(2)};
  meta["domain_upper"] = {data.meta.domain.upper(0), data.meta.domain.upper(1),
                          data.meta.domain.upper(2)};
  write_file_atomic(path, text);
  write_file_atomic(metadata_path(path), meta.dump(2) + "\n");
}

Dataset load_dataset(const fs::path& path, bool require_values) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open dataset " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw LoadError(path.string() + " is empty");
  const auto header = split(line, ',');
  auto column = [&](const std::string& name) -> int {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) return static_cast<int>(c);
    }
    return -1;
  };
  const int cx = column("x"), cy = column("y"), ct = column("t"),
            cY = column("Y");
  if (cx < 0 || cy < 0 || ct < 0) {
    throw LoadError(path.string() + ": header must name columns x, y, t");
  }
  if (require_values && cY < 0) {
    throw LoadError(path.string() + ": header lacks the Y column");
  }

  std::vector<std::array<double, 4>> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) {
      throw LoadError(path.string() + ":" + std::to_string(line_no) +
                      ": expected " + std::to_string(header.size()) +
                      " fields");
    }
    std::array<double, 4> r{};
    r[0] = parse_double(cells[static_cast<std::size_t>(cx)], path, line_no);
    r[1] = parse_double(cells[static_cast<std::size_t>(cy)], path, line_no);
    r[2] = parse_double(cells[static_cast<std::size_t>(ct)], path, line_no);
    if (cY >= 0) {
      r[3] = parse_double(cells[static_cast<std::size_t>(cY)], path, line_no);
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw LoadError(path.string() + " has no data rows");

  Dataset data;
  const auto n = static_cast<Eigen::Index>(rows.size());
  data.points.resize(n, 3);
  data.values = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    data.points.row(i) << r[0], r[1], r[2];
    data.values(i) = r[3];
  }

  const fs::path meta_path = metadata_path(path);
  if (fs::exists(meta_path)) {
    try {
      std::ifstream mi(meta_path);
      const auto meta = nlohmann::json::parse(mi);
      data.meta.solution_id = meta.value("solution", std::string{});
      data.meta.noise_std = meta.value("noise_std", 0.0);
      data.meta.seed = meta.value("seed", std::uint64_t{0});
      if (meta.contains("domain_lower") && meta.contains("domain_upper")) {
        for (int k = 0; k < 3; ++k) {
          data.meta.domain.lower(k) = meta["domain_lower"].at(k).get<double>();
          data.meta.domain.upper(k) = meta["domain_upper"].at(k).get<double>();
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(meta_path.string() + ": " + e.what());
    }
  }
  return data;
}

}  // namespace epgp
