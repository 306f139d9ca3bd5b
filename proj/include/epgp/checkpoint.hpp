#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "epgp/likelihood.hpp"
#include "epgp/training.hpp"
#include "epgp/variety.hpp"

namespace epgp {

// Everything needed to predict with a trained model.
struct ModelCheckpoint {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  PdeId pde = PdeId::Wave2d;
  std::string mode;
  std::string config_hash;
  ModelState state;
  Eigen::VectorXd weights;

  [[nodiscard]] VarietySpec spec() const { return VarietySpec::for_pde(pde); }
  // phi(points)^T weights.
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& points) const;
};

// Stable 64-bit hex digest of the configuration fields that affect training.
[[nodiscard]] std::string config_hash(const TrainConfig& cfg,
                                      const VarietySpec& spec);

[[nodiscard]] ModelCheckpoint make_checkpoint(const TrainReport& report,
                                              const VarietySpec& spec,
                                              const TrainConfig& cfg);

// Serialized as versioned key-value text; doubles use shortest round-trip
// decimal form so save/load is bit-exact.
[[nodiscard]] std::string serialize_checkpoint(const ModelCheckpoint& ckpt);
[[nodiscard]] ModelCheckpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const ModelCheckpoint& ckpt,
                     const std::filesystem::path& path);
// Throws LoadError for unreadable, truncated, corrupt, or newer-version files.
[[nodiscard]] ModelCheckpoint load_checkpoint(
    const std::filesystem::path& path);

// Field-for-field bitwise equality.
[[nodiscard]] bool identical(const ModelCheckpoint& a,
                             const ModelCheckpoint& b);

}  // namespace epgp
