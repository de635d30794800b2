#pragma once
//
// Linear measurement ensembles A : R^{n1 x n2} -> R^m, their adjoints, the
// entry-sampling mask P_Omega and the additive Gaussian noise model.
//

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lrr/matcore.hpp"

namespace lrr {

enum class EnsembleKind { gaussian, rademacher, entry_sampling, vectorization };

std::string to_string(EnsembleKind kind);
EnsembleKind parse_ensemble_kind(const std::string& name);

/// A set of distinct observed (row, col) positions, stored in row-major order.
class ObservationSet {
public:
  using Entry = std::pair<Index, Index>;

  ObservationSet() = default;
  /// Validates range and distinctness; the pairs are sorted row-major.
  ObservationSet(Index n1, Index n2, std::vector<Entry> pairs);

  Index rows() const { return n1_; }
  Index cols() const { return n2_; }
  Index size() const { return static_cast<Index>(pairs_.size()); }
  bool empty() const { return pairs_.empty(); }
  /// Sampling fraction |Omega| / (n1 n2).
  double fraction() const;
  const std::vector<Entry>& pairs() const { return pairs_; }
  bool contains(Index i, Index j) const;

  /// Observed-entry counts per row / per column.
  std::vector<Index> row_degrees() const;
  std::vector<Index> col_degrees() const;

  friend bool operator==(const ObservationSet&, const ObservationSet&) = default;

private:
  Index n1_ = 0;
  Index n2_ = 0;
  std::vector<Entry> pairs_;
};

/// Omega of size m drawn uniformly without replacement (Floyd's algorithm).
ObservationSet sample_omega(Index n1, Index n2, Index m, std::uint64_t seed);

/// Entries in Omega copied, all others zero.
Matrix project_omega(const ObservationSet& omega, const Matrix& X);

//
// Immutable measurement operator. Gaussian and Rademacher ensembles hold
// their sensing matrices explicitly (one row per A_i); entry-sampling and
// vectorization are index maps.
//
class MeasurementEnsemble {
public:
  /// Entries iid N(0, 1/m).
  static MeasurementEnsemble gaussian(Index n1, Index n2, Index m, std::uint64_t seed);
  /// Entries iid +-1/sqrt(m).
  static MeasurementEnsemble rademacher(Index n1, Index n2, Index m, std::uint64_t seed);
  static MeasurementEnsemble entry_sampling(ObservationSet omega);
  /// Row-major stacking of all n1 n2 entries.
  static MeasurementEnsemble vectorization(Index n1, Index n2);

  EnsembleKind kind() const { return kind_; }
  Index rows() const { return n1_; }
  Index cols() const { return n2_; }
  Index size() const { return m_; }
  std::uint64_t seed() const { return seed_; }
  /// Only meaningful for entry sampling.
  const ObservationSet& omega() const { return omega_; }

  Vector apply(const Matrix& X) const;
  Matrix adjoint(const Vector& v) const;

  /// Sensing matrix A_i (materialized on demand for the implicit kinds).
  Matrix sensing_matrix(Index i) const;
  /// A(e_i e_j^T) without forming the basis matrix.
  Vector basis_response(Index i, Index j) const;

  /// Upper estimate of ||A^* A|| (exact for the implicit kinds).
  double lipschitz_estimate() const;

private:
  MeasurementEnsemble() = default;
  static MeasurementEnsemble dense(EnsembleKind kind, Index n1, Index n2, Index m, std::uint64_t seed);
  void check_matrix(const Matrix& X, const char* what) const;

  EnsembleKind kind_ = EnsembleKind::vectorization;
  Index n1_ = 0;
  Index n2_ = 0;
  Index m_ = 0;
  std::uint64_t seed_ = 0;
  ObservationSet omega_;
  // m x (n1 n2); column index is the column-major position j * n1 + i.
  std::shared_ptr<const Matrix> rows_;
};

struct NoiseModel {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// y + z with z iid N(0, sigma^2) drawn from noise.seed.
Vector add_noise(const Vector& y, const NoiseModel& noise);

struct RecoveryProblem {
  MeasurementEnsemble ensemble;
  Vector y;
  NoiseModel noise;
  std::optional<Matrix> truth;

  /// y = A(truth) + z.
  static RecoveryProblem from_truth(MeasurementEnsemble ensemble, Matrix truth, NoiseModel noise);
  void validate() const;
};

// omega-v1: "omega n1 n2 m" followed by m lines "i j" (0-based).
void write_omega(std::ostream& os, const ObservationSet& omega);
ObservationSet read_omega(std::istream& is);
void save_omega(const std::string& path, const ObservationSet& omega);
ObservationSet load_omega(const std::string& path);

// One value per line, 17 significant digits.
void write_vector(std::ostream& os, const Vector& v);
Vector read_vector(std::istream& is);

} // namespace lrr
