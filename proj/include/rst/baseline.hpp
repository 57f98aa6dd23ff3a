#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rst/core.hpp"

// Scoring math of the encoder-based baselines over externally supplied span
// vectors: FFN projections, the biaffine split score, per-label scores, and
// the concatenated shift-reduce classifier input. No training.
namespace rst::baseline {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Side { Left, Right };

/// h = act(weight * u + bias), weight is hidden x input.
struct Projection {
  Matrix weight;
  Vector bias;
};

/// h_l^T W h_r + v_left . h_l + v_right . h_r
struct Biaffine {
  Matrix w;
  Vector v_left;
  Vector v_right;
};

struct BiaffineParams {
  Projection left;
  Projection right;
  bool use_tanh = true;
  Biaffine split;
  std::vector<std::string> labels;
  std::vector<Biaffine> label_params;  // parallel to labels

  Eigen::Index input_dim() const { return left.weight.cols(); }
  Eigen::Index hidden_dim() const { return left.weight.rows(); }

  /// Throws DimensionMismatch on inconsistent shapes or label tables.
  void validate() const;
  const Biaffine& label(std::string_view name) const;

  static BiaffineParams zeros(Eigen::Index input_dim, Eigen::Index hidden_dim,
                              std::vector<std::string> labels);
  /// Entries uniform in [-1, 1].
  static BiaffineParams random(Eigen::Index input_dim, Eigen::Index hidden_dim,
                               std::vector<std::string> labels,
                               std::uint64_t seed);
};

/// Three nuclearity patterns followed by the inventory relations.
std::vector<std::string> label_set(const LabelInventory& inventory);

Vector project(const Vector& u, Side side, const BiaffineParams& params);

double biaffine_score(const Vector& h_left, const Vector& h_right,
                      const Biaffine& b);
double split_score(const Vector& h_left, const Vector& h_right,
                   const BiaffineParams& params);
double label_score(const Vector& h_left, const Vector& h_right,
                   std::string_view label, const BiaffineParams& params);

/// Span vectors u_{i:k} and u_{k+1:j} for one split point.
struct SplitCandidate {
  Vector left;
  Vector right;
};

using SpanEncoder = std::function<Vector(Span)>;
/// Candidates k = 0 .. len-2 for the span.
std::vector<SplitCandidate> split_candidates(Span span,
                                             const SpanEncoder& encode);

/// Index of the maximum; ties go to the smallest index. Throws NoCandidates.
std::size_t argmax_first(std::span<const double> scores);

/// Argmax over candidates of split_score on projected pairs (ties: smallest
/// k). Candidates are scored in parallel.
int best_split(std::span<const SplitCandidate> candidates,
               const BiaffineParams& params);
/// Same result, one thread; reference for tests and benchmarks.
int best_split_serial(std::span<const SplitCandidate> candidates,
                      const BiaffineParams& params);

/// Argmax over `labels` (all labels when empty); ties go to the
/// lexicographically smallest name.
std::string best_label(const Vector& h_left, const Vector& h_right,
                       const BiaffineParams& params,
                       std::span<const std::string> labels = {});
std::string best_label_serial(const Vector& h_left, const Vector& h_right,
                              const BiaffineParams& params,
                              std::span<const std::string> labels = {});

/// [u_s0; u_s1; u_q0]
Vector concat_features(const Vector& u_s0, const Vector& u_s1,
                       const Vector& u_q0);

/// Self-describing text format: header with dimensions and label list, then
/// named row-major blocks.
void save_params(std::ostream& out, const BiaffineParams& params);
BiaffineParams load_params(std::istream& in);

}  // namespace rst::baseline
