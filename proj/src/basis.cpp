#include "epgp/basis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>

#include "epgp/errors.hpp"
#include "trig_kernel.hpp"

namespace epgp {

namespace {

// Splits x . xi into its oscillatory and decaying parts.
struct Phase {
  double oscillation = 0.0;
  double decay = 0.0;
};

Phase phase_of(const Eigen::VectorXd& xi, const std::vector<bool>& decay_mask,
               const Eigen::VectorXd& x) {
  Phase out;
  for (Eigen::Index k = 0; k < xi.size(); ++k) {
    const double contrib = x(k) * xi(k);
    if (decay_mask[static_cast<std::size_t>(k)]) {
      out.decay += contrib;
    } else {
      out.oscillation += contrib;
    }
  }
  return out;
}

}  // namespace

BasisMatrix::BasisMatrix(Eigen::MatrixXd phi, std::vector<RowEntry> row_map,
                         Eigen::MatrixXd frequencies)
    : phi_(std::move(phi)),
      row_map_(std::move(row_map)),
      frequencies_(std::move(frequencies)) {
  if (static_cast<Eigen::Index>(row_map_.size()) != phi_.rows()) {
    throw InvalidArgument("row map does not match basis row count");
  }
}

BasisMatrix build_phi(const VarietySpec& spec, const Eigen::MatrixXd& points,
                      const Eigen::MatrixXd& z_free,
                      std::optional<PdeParam> param) {
  if (points.cols() != spec.ambient_dim) {
    throw InvalidArgument("points have " + std::to_string(points.cols()) +
                          " columns, expected " +
                          std::to_string(spec.ambient_dim));
  }
  if (z_free.cols() != spec.free_dim) {
    throw InvalidArgument("frequencies have " + std::to_string(z_free.cols()) +
                          " columns, expected " +
                          std::to_string(spec.free_dim));
  }
  if (!points.allFinite()) {
    throw InvalidArgument("points contain non-finite values");
  }

  const Variety& variety = variety_for(spec.pde_id);
  const double a_sq = resolve_param(spec, param);
  const int b = spec.branch_count;
  const Eigen::Index m = z_free.rows();
  const Eigen::Index n = points.rows();
  const Eigen::Index pairs = m * b;

  Eigen::MatrixXd freqs(pairs, spec.ambient_dim);
  std::vector<RowEntry> row_map;
  row_map.reserve(static_cast<std::size_t>(2 * pairs));
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::VectorXd z = z_free.row(j).transpose();
    if (!z.allFinite()) {
      throw InvalidArgument("free frequency " + std::to_string(j) +
                            " is not finite");
    }
    const auto branches = variety.lift(z, a_sq);
    for (int br = 0; br < b; ++br) {
      freqs.row(j * b + br) = branches[static_cast<std::size_t>(br)].transpose();
      row_map.push_back({static_cast<int>(j), br, TrigKind::Cos});
      row_map.push_back({static_cast<int>(j), br, TrigKind::Sin});
    }
  }

  const std::vector<bool> mask = variety.decay_mask();
  Eigen::MatrixXd osc_freqs = freqs;
  Eigen::MatrixXd decay_freqs = Eigen::MatrixXd::Zero(pairs, spec.ambient_dim);
  bool any_decay = false;
  for (int k = 0; k < spec.ambient_dim; ++k) {
    if (mask[static_cast<std::size_t>(k)]) {
      decay_freqs.col(k) = freqs.col(k);
      osc_freqs.col(k).setZero();
      any_decay = true;
    }
  }

  // pairs x n; column i holds the phases of point i.
  const Eigen::MatrixXd theta = osc_freqs * points.transpose();
  Eigen::MatrixXd phi(2 * pairs, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    detail::interleaved_cos_sin(theta.col(i).data(), phi.col(i).data(), pairs);
  }
  using RowView = Eigen::Map<Eigen::MatrixXd, 0, Eigen::Stride<Eigen::Dynamic, 2>>;
  const Eigen::Stride<Eigen::Dynamic, 2> stride(2 * pairs, 2);
  RowView cos_rows(phi.data(), pairs, n, stride);
  RowView sin_rows(phi.data() + 1, pairs, n, stride);
  if (any_decay) {
    const Eigen::ArrayXXd envelope =
        (decay_freqs * points.transpose()).array().exp();
    cos_rows.array() *= envelope;
    sin_rows.array() *= envelope;
  }
  return BasisMatrix(std::move(phi), std::move(row_map), std::move(freqs));
}

double pde_residual_of_basis(const VarietySpec& spec,
                             const Eigen::VectorXd& z_free,
                             std::optional<PdeParam> param,
                             const Eigen::VectorXd& point, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw InvalidArgument("finite-difference step must be positive");
  }
  if (point.size() != spec.ambient_dim) {
    throw InvalidArgument("point has wrong dimension");
  }
  const Variety& variety = variety_for(spec.pde_id);
  const auto terms = variety.operator_terms(resolve_param(spec, param));
  if (terms.empty()) return 0.0;

  const auto branches = parametrize(spec, z_free, param);
  const std::vector<bool> mask = variety.decay_mask();

  // Central-difference weights indexed by offset -1, 0, +1.
  auto stencil = [h](int order) -> std::array<double, 3> {
    switch (order) {
      case 0: return {0.0, 1.0, 0.0};
      case 1: return {-0.5 / h, 0.0, 0.5 / h};
      case 2: return {1.0 / (h * h), -2.0 / (h * h), 1.0 / (h * h)};
      default: throw InvalidArgument("operator order above 2 unsupported");
    }
  };

  double worst = 0.0;
  for (const Eigen::VectorXd& xi : branches) {
    for (const TrigKind kind : {TrigKind::Cos, TrigKind::Sin}) {
      auto f = [&](const Eigen::VectorXd& x) {
        const Phase ph = phase_of(xi, mask, x);
        const double trig = kind == TrigKind::Cos ? std::cos(ph.oscillation)
                                                  : std::sin(ph.oscillation);
        return std::exp(ph.decay) * trig;
      };
      double residual = 0.0;
      for (const OperatorTerm& term : terms) {
        // Tensor-product stencil over the coordinates the term differentiates.
        double acc = 0.0;
        Eigen::VectorXd x = point;
        const int d = spec.ambient_dim;
        std::function<void(int, double)> walk = [&](int k, double weight) {
          if (k == d) {
            acc += weight * f(x);
            return;
          }
          const auto w = stencil(term.orders[static_cast<std::size_t>(k)]);
          for (int off = -1; off <= 1; ++off) {
            const double wk = w[static_cast<std::size_t>(off + 1)];
            if (wk == 0.0) continue;
            x(k) = point(k) + off * h;
            walk(k + 1, weight * wk);
          }
          x(k) = point(k);
        };
        walk(0, 1.0);
        residual += term.coefficient * acc;
      }
      worst = std::max(worst, std::abs(residual));
    }
  }
  return worst;
}

}  // namespace epgp
