#include "epgp/checkpoint.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "epgp/dataset.hpp"
#include "epgp/errors.hpp"

namespace epgp {

namespace {

constexpr std::string_view kMagic = "epgp-checkpoint";

struct TypedArray {
  std::vector<long> shape;
  std::vector<double> values;
};

std::string array_line(const std::string& key, const std::vector<long>& shape,
                       const double* data, std::size_t count) {
  std::string line = key + " : f64[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) line += ',';
    line += std::to_string(shape[i]);
  }
  line += "] =";
  for (std::size_t i = 0; i < count; ++i) {
    line += ' ';
    line += format_double(data[i]);
  }
  return line + '\n';
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

TypedArray parse_array(const std::string& key, const std::string& type_and_data) {
  // f64[d0,d1] = v v v
  const auto open = type_and_data.find('[');
  const auto close = type_and_data.find(']');
  const auto eq = type_and_data.find('=', close == std::string::npos ? 0 : close);
  if (type_and_data.rfind("f64", 0) != 0 || open == std::string::npos ||
      close == std::string::npos || eq == std::string::npos) {
    throw LoadError("corrupt checkpoint: malformed array '" + key + "'");
  }
  TypedArray arr;
  std::istringstream dims(type_and_data.substr(open + 1, close - open - 1));
  std::string dim;
  long expected = 1;
  while (std::getline(dims, dim, ',')) {
    long d = 0;
    const std::string t = trim(dim);
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), d);
    if (ec != std::errc() || p != t.data() + t.size() || d < 0) {
      throw LoadError("corrupt checkpoint: bad shape for '" + key + "'");
    }
    arr.shape.push_back(d);
    expected *= d;
  }
  std::istringstream vals(type_and_data.substr(eq + 1));
  std::string tok;
  while (vals >> tok) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
      throw LoadError("corrupt checkpoint: bad value '" + tok + "' in '" + key +
                      "'");
    }
    arr.values.push_back(v);
  }
  if (static_cast<long>(arr.values.size()) != expected) {
    throw LoadError("corrupt checkpoint: '" + key + "' declares " +
                    std::to_string(expected) + " values but holds " +
                    std::to_string(arr.values.size()));
  }
  return arr;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Eigen::VectorXd ModelCheckpoint::predict(const Eigen::MatrixXd& points) const {
  const BasisMatrix basis =
      build_phi(spec(), points, state.z_free, state.param());
  if (basis.rows() != weights.size()) {
    throw ConfigError("checkpoint weights do not match its basis");
  }
  return basis.phi().transpose() * weights;
}

std::string config_hash(const TrainConfig& cfg, const VarietySpec& spec) {
  std::ostringstream s;
  s << to_string(spec.pde_id) << '|' << to_string(cfg.mode) << '|' << cfg.m
    << '|' << cfg.iters << '|' << format_double(cfg.lr) << '|' << cfg.seed
    << '|' << (cfg.a_sq_init ? format_double(*cfg.a_sq_init) : "-") << '|'
    << (cfg.a_sq_true ? format_double(*cfg.a_sq_true) : "-") << '|'
    << cfg.stage1_iters << '|' << format_double(cfg.stage1_tol) << '|'
    << cfg.max_restarts << '|' << format_double(cfg.convergence_tol);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(s.str())));
  return buf;
}

ModelCheckpoint make_checkpoint(const TrainReport& report,
                                const VarietySpec& spec,
                                const TrainConfig& cfg) {
  ModelCheckpoint c;
  c.pde = spec.pde_id;
  c.mode = std::string(to_string(cfg.mode));
  c.config_hash = config_hash(cfg, spec);
  c.state = report.posterior.state_snapshot;
  c.weights = report.posterior.weights;
  return c;
}

std::string serialize_checkpoint(const ModelCheckpoint& c) {
  std::string out(kMagic);
  out += '\n';
  out += "format_version = " + std::to_string(c.format_version) + '\n';
  out += "pde = " + std::string(to_string(c.pde)) + '\n';
  out += "mode = " + c.mode + '\n';
  out += "config_hash = " + c.config_hash + '\n';
  if (c.state.a_sq) {
    out += array_line("a_sq", {1}, &*c.state.a_sq, 1);
  } else {
    out += array_line("a_sq", {0}, nullptr, 0);
  }
  // Row-major so the file reads one frequency per group of values.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      z = c.state.z_free;
  out += array_line("z_free", {static_cast<long>(z.rows()),
                               static_cast<long>(z.cols())},
                    z.data(), static_cast<std::size_t>(z.size()));
  out += array_line("log_sigma_j_sq",
                    {static_cast<long>(c.state.log_sigma_j_sq.size())},
                    c.state.log_sigma_j_sq.data(),
                    static_cast<std::size_t>(c.state.log_sigma_j_sq.size()));
  out += array_line("log_sigma0_sq", {1}, &c.state.log_sigma0_sq, 1);
  out += array_line("weights", {static_cast<long>(c.weights.size())},
                    c.weights.data(),
                    static_cast<std::size_t>(c.weights.size()));
  out += "end\n";
  return out;
}

ModelCheckpoint parse_checkpoint(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != kMagic) {
    throw LoadError("corrupt checkpoint: missing header");
  }
  std::map<std::string, std::string> scalars;
  std::map<std::string, TypedArray> arrays;
  bool ended = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line == "end") {
      ended = true;
      break;
    }
    const auto colon = line.find(" : ");
    const auto eq = line.find(" = ");
    if (colon != std::string::npos && (eq == std::string::npos || colon < eq)) {
      const std::string key = trim(line.substr(0, colon));
      arrays[key] = parse_array(key, trim(line.substr(colon + 3)));
    } else if (eq != std::string::npos) {
      scalars[trim(line.substr(0, eq))] = trim(line.substr(eq + 3));
    } else {
      throw LoadError("corrupt checkpoint: unrecognized line '" + line + "'");
    }
    if (scalars.count("format_version")) {
      int version = 0;
      const std::string& v = scalars["format_version"];
      const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), version);
      if (ec != std::errc() || p != v.data() + v.size()) {
        throw LoadError("corrupt checkpoint: bad format_version");
      }
      if (version > ModelCheckpoint::kFormatVersion || version < 1) {
        throw LoadError("unsupported checkpoint format_version " + v +
                        " (this build reads up to " +
                        std::to_string(ModelCheckpoint::kFormatVersion) + ")");
      }
    }
  }
  if (!ended) throw LoadError("corrupt checkpoint: truncated (no end marker)");

  auto scalar = [&](const char* key) -> const std::string& {
    const auto it = scalars.find(key);
    if (it == scalars.end()) {
      throw LoadError(std::string("corrupt checkpoint: missing '") + key + "'");
    }
    return it->second;
  };
  auto array = [&](const char* key) -> const TypedArray& {
    const auto it = arrays.find(key);
    if (it == arrays.end()) {
      throw LoadError(std::string("corrupt checkpoint: missing '") + key + "'");
    }
    return it->second;
  };

  ModelCheckpoint c;
  c.format_version = std::stoi(scalar("format_version"));
  try {
    c.pde = parse_pde_id(scalar("pde"));
  } catch (const ConfigError& e) {
    throw LoadError(std::string("corrupt checkpoint: ") + e.what());
  }
  c.mode = scalar("mode");
  c.config_hash = scalar("config_hash");

  const TypedArray& a = array("a_sq");
  if (a.values.size() == 1) c.state.a_sq = a.values[0];

  const TypedArray& z = array("z_free");
  if (z.shape.size() != 2) throw LoadError("corrupt checkpoint: z_free rank");
  c.state.z_free.resize(z.shape[0], z.shape[1]);
  for (long j = 0; j < z.shape[0]; ++j) {
    for (long k = 0; k < z.shape[1]; ++k) {
      c.state.z_free(j, k) =
          z.values[static_cast<std::size_t>(j * z.shape[1] + k)];
    }
  }
  const TypedArray& ls = array("log_sigma_j_sq");
  c.state.log_sigma_j_sq = Eigen::Map<const Eigen::VectorXd>(
      ls.values.data(), static_cast<Eigen::Index>(ls.values.size()));
  const TypedArray& l0 = array("log_sigma0_sq");
  if (l0.values.size() != 1) {
    throw LoadError("corrupt checkpoint: log_sigma0_sq must be scalar");
  }
  c.state.log_sigma0_sq = l0.values[0];
  const TypedArray& w = array("weights");
  c.weights = Eigen::Map<const Eigen::VectorXd>(
      w.values.data(), static_cast<Eigen::Index>(w.values.size()));

  try {
    c.state.validate(c.spec());
  } catch (const Error& e) {
    throw LoadError(std::string("corrupt checkpoint: ") + e.what());
  }
  if (c.weights.size() != c.state.log_sigma_j_sq.size()) {
    throw LoadError("corrupt checkpoint: weight count does not match basis");
  }
  return c;
}

void save_checkpoint(const ModelCheckpoint& ckpt,
                     const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(ckpt));
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

bool identical(const ModelCheckpoint& a, const ModelCheckpoint& b) {
  return a.format_version == b.format_version && a.pde == b.pde &&
         a.mode == b.mode && a.config_hash == b.config_hash &&
         identical(a.state, b.state) && a.weights.size() == b.weights.size() &&
         a.weights == b.weights;
}

}  // namespace epgp
