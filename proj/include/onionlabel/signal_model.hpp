#pragma once

// Weak-signal matrices: representation, ingestion, validation and reduction.
//
// A weak signal over n points and k classes is a row of length n*k. Column
// c*n + j (0-based class block c, point j) holds the signal's probability that
// point j belongs to class c+1. Abstentions are materialized eagerly as the
// uniform fill 1/k; the boolean mask is kept only for reporting and voting.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace onionlabel {

using AbstainMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct ValidationIssue {
  enum class Kind { kOutOfRange, kNotANumber, kShape, kBadFill };
  Kind kind;
  std::size_t row = 0;
  std::size_t col = 0;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  std::vector<double> abstain_fraction;  // one entry per signal

  bool ok() const { return issues.empty(); }
};

class WeakSignalMatrix {
 public:
  /// Takes ownership of `values` and `abstain`; abstain entries are
  /// overwritten with 1/k. Throws ShapeError / ParseError on any violation.
  WeakSignalMatrix(Eigen::MatrixXd values, AbstainMask abstain, std::size_t n, std::size_t k);

  /// Dense probability-form matrix with no abstentions.
  static WeakSignalMatrix dense(Eigen::MatrixXd values, std::size_t n, std::size_t k);

  std::size_t m() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }
  std::size_t cols() const { return n_ * k_; }
  double fill_value() const { return 1.0 / static_cast<double>(k_); }

  /// Column of (0-based) class block `cls` for point `point`.
  std::size_t column(std::size_t cls, std::size_t point) const { return cls * n_ + point; }

  const Eigen::MatrixXd& values() const { return values_; }
  const AbstainMask& abstain() const { return abstain_; }
  Eigen::VectorXd row(std::size_t i) const { return values_.row(static_cast<Eigen::Index>(i)).transpose(); }

 private:
  Eigen::MatrixXd values_;
  AbstainMask abstain_;
  std::size_t n_;
  std::size_t k_;
};

/// Hard labels in {1..k}; the one-hot form is derived on demand.
class LabelVector {
 public:
  LabelVector(std::vector<int> hard, std::size_t k);

  /// Per-point argmax over the class blocks of a length n*k vector.
  static LabelVector from_onehot(const Eigen::VectorXd& onehot, std::size_t n, std::size_t k);

  std::size_t n() const { return hard_.size(); }
  std::size_t k() const { return k_; }
  int operator[](std::size_t j) const { return hard_[j]; }
  std::span<const int> hard() const { return hard_; }
  Eigen::VectorXd onehot() const;

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

 private:
  std::vector<int> hard_;
  std::size_t k_;
};

/// Raw-data validation: reports every invariant violation instead of throwing.
ValidationReport validate(const Eigen::MatrixXd& values, const AbstainMask& abstain, std::size_t n,
                          std::size_t k);
ValidationReport validate(const WeakSignalMatrix& w);

// ---------------------------------------------------------------------------
// Ingestion
//
// CSV: one signal per line, no header, comma separated. Binary tasks (k = 2)
// use {-1, 0, +1} where +1 votes class 1, -1 votes class 2 and 0 abstains;
// multi-class tasks use {0, 1..k} with 0 abstaining.
//
// JSON: {"n": .., "k": .., "format": "pws" | "prob", "rows": [[..], ..]}.
// "pws" rows have n entries in the alphabet above; "prob" rows have n*k
// entries in [0,1], with null marking an abstention.

/// Expands an m x n matrix of PWS votes into probability form.
WeakSignalMatrix expand_pws(const std::vector<std::vector<int>>& votes, std::size_t n, std::size_t k);

/// Inverse of expand_pws for the non-abstain entries (abstain decodes to 0).
std::vector<std::vector<int>> to_pws_votes(const WeakSignalMatrix& w);

WeakSignalMatrix parse_pws_csv(std::istream& in, std::optional<std::size_t> n, std::size_t k);
WeakSignalMatrix parse_signal_json(std::istream& in, std::optional<std::size_t> n,
                                   std::optional<std::size_t> k);

/// Loads CSV or JSON (detected from content). `n` is checked when given.
WeakSignalMatrix load_pws_matrix(const std::filesystem::path& path, std::optional<std::size_t> n,
                                 std::optional<std::size_t> k);

void write_pws_csv(std::ostream& out, const WeakSignalMatrix& w);

/// One integer class (1..k) per line.
LabelVector load_labels(const std::filesystem::path& path, std::size_t k);
LabelVector parse_labels(std::istream& in, std::size_t k);
void write_labels(std::ostream& out, const LabelVector& y);

// ---------------------------------------------------------------------------

/// Averages contiguous row chunks; earlier chunks take the extra rows when
/// m is not a multiple of `chunks`. Returns `w` unchanged when m <= chunks.
WeakSignalMatrix reduce_signals(const WeakSignalMatrix& w, std::size_t chunks = 5);

/// (1/(nk)) * (-2 w.y + w.1 + n) for a signal row and hard labels.
double expected_error_rate(const Eigen::VectorXd& w, const LabelVector& y);

}  // namespace onionlabel
