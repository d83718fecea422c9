#include "onionlabel/signal_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "onionlabel/errors.hpp"

namespace onionlabel {

namespace {

std::string at(std::size_t row, std::size_t col) {
  return "(" + std::to_string(row) + ", " + std::to_string(col) + ")";
}

void require_classes(std::size_t k) {
  if (k < 2) throw std::invalid_argument("class count k must be >= 2, got " + std::to_string(k));
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

int parse_int(std::string_view token, std::size_t line, std::size_t field) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  int value = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (token.empty() || ec != std::errc() || ptr != end) {
    throw ParseError("line " + std::to_string(line + 1) + ", field " + std::to_string(field + 1) +
                     ": expected an integer vote, got '" + std::string(token) + "'");
  }
  return value;
}

// Maps a PWS vote to a 0-based class block, or -1 for an abstention.
int vote_to_block(int vote, std::size_t k, std::size_t row, std::size_t point) {
  if (vote == 0) return -1;
  if (k == 2) {
    if (vote == 1) return 0;
    if (vote == -1) return 1;
  } else if (vote >= 1 && static_cast<std::size_t>(vote) <= k) {
    return vote - 1;
  }
  throw ParseError("vote " + std::to_string(vote) + " at " + at(row, point) +
                   " is outside the PWS alphabet for k=" + std::to_string(k));
}

int block_to_vote(std::size_t block, std::size_t k) {
  if (k == 2) return block == 0 ? 1 : -1;
  return static_cast<int>(block) + 1;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

// ---------------------------------------------------------------------------

WeakSignalMatrix::WeakSignalMatrix(Eigen::MatrixXd values, AbstainMask abstain, std::size_t n,
                                   std::size_t k)
    : values_(std::move(values)), abstain_(std::move(abstain)), n_(n), k_(k) {
  require_classes(k_);
  const ValidationReport report = validate(values_, abstain_, n_, k_);
  if (!report.ok()) {
    const auto& issue = report.issues.front();
    if (issue.kind == ValidationIssue::Kind::kShape) throw ShapeError(issue.message);
    throw ParseError(issue.message);
  }
  values_ = abstain_.select(Eigen::MatrixXd::Constant(values_.rows(), values_.cols(), fill_value()),
                            values_);
}

WeakSignalMatrix WeakSignalMatrix::dense(Eigen::MatrixXd values, std::size_t n, std::size_t k) {
  AbstainMask none = AbstainMask::Constant(values.rows(), values.cols(), false);
  return WeakSignalMatrix(std::move(values), std::move(none), n, k);
}

ValidationReport validate(const Eigen::MatrixXd& values, const AbstainMask& abstain, std::size_t n,
                          std::size_t k) {
  ValidationReport report;
  using Kind = ValidationIssue::Kind;
  const auto rows = static_cast<std::size_t>(values.rows());
  const auto cols = static_cast<std::size_t>(values.cols());
  if (k < 2 || n == 0) {
    report.issues.push_back({Kind::kShape, 0, 0, "need n >= 1 and k >= 2"});
    return report;
  }
  if (rows == 0) report.issues.push_back({Kind::kShape, 0, 0, "matrix has no signals"});
  if (cols != n * k) {
    report.issues.push_back({Kind::kShape, 0, 0,
                             "expected " + std::to_string(n * k) + " columns (n=" + std::to_string(n) +
                                 ", k=" + std::to_string(k) + "), got " + std::to_string(cols)});
  }
  if (abstain.rows() != values.rows() || abstain.cols() != values.cols()) {
    report.issues.push_back({Kind::kShape, 0, 0, "abstain mask shape differs from value shape"});
  }
  if (!report.ok()) return report;

  report.abstain_fraction.resize(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    std::size_t abstained = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      if (abstain(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c))) {
        ++abstained;
      } else if (std::isnan(v)) {
        report.issues.push_back({Kind::kNotANumber, i, c, "NaN entry at " + at(i, c)});
      } else if (v < 0.0 || v > 1.0) {
        report.issues.push_back(
            {Kind::kOutOfRange, i, c, "entry " + std::to_string(v) + " at " + at(i, c) + " outside [0,1]"});
      }
    }
    report.abstain_fraction[i] = static_cast<double>(abstained) / static_cast<double>(cols);
  }
  return report;
}

ValidationReport validate(const WeakSignalMatrix& w) {
  ValidationReport report = validate(w.values(), w.abstain(), w.n(), w.k());
  const double fill = w.fill_value();
  for (Eigen::Index i = 0; i < w.values().rows(); ++i) {
    for (Eigen::Index c = 0; c < w.values().cols(); ++c) {
      if (w.abstain()(i, c) && w.values()(i, c) != fill) {
        const auto row = static_cast<std::size_t>(i);
        const auto col = static_cast<std::size_t>(c);
        report.issues.push_back({ValidationIssue::Kind::kBadFill, row, col,
                                 "abstain entry at " + at(row, col) + " is not 1/k"});
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

LabelVector::LabelVector(std::vector<int> hard, std::size_t k) : hard_(std::move(hard)), k_(k) {
  require_classes(k_);
  for (std::size_t j = 0; j < hard_.size(); ++j) {
    if (hard_[j] < 1 || static_cast<std::size_t>(hard_[j]) > k_) {
      throw ParseError("label " + std::to_string(hard_[j]) + " for point " + std::to_string(j + 1) +
                       " is outside 1.." + std::to_string(k_));
    }
  }
}

LabelVector LabelVector::from_onehot(const Eigen::VectorXd& onehot, std::size_t n, std::size_t k) {
  if (static_cast<std::size_t>(onehot.size()) != n * k) {
    throw ShapeError("one-hot vector has length " + std::to_string(onehot.size()) + ", expected " +
                     std::to_string(n * k));
  }
  std::vector<int> hard(n, 1);
  for (std::size_t j = 0; j < n; ++j) {
    double best = onehot(static_cast<Eigen::Index>(j));
    for (std::size_t c = 1; c < k; ++c) {
      const double v = onehot(static_cast<Eigen::Index>(c * n + j));
      if (v > best) {
        best = v;
        hard[j] = static_cast<int>(c) + 1;
      }
    }
  }
  return LabelVector(std::move(hard), k);
}

Eigen::VectorXd LabelVector::onehot() const {
  const std::size_t n = hard_.size();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n * k_));
  for (std::size_t j = 0; j < n; ++j) {
    y(static_cast<Eigen::Index>((static_cast<std::size_t>(hard_[j]) - 1) * n + j)) = 1.0;
  }
  return y;
}

// ---------------------------------------------------------------------------

WeakSignalMatrix expand_pws(const std::vector<std::vector<int>>& votes, std::size_t n, std::size_t k) {
  require_classes(k);
  const std::size_t m = votes.size();
  if (m == 0) throw ShapeError("weak-label matrix has no signals");
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n * k));
  AbstainMask abstain = AbstainMask::Constant(values.rows(), values.cols(), false);
  for (std::size_t i = 0; i < m; ++i) {
    if (votes[i].size() != n) {
      throw ShapeError("signal " + std::to_string(i + 1) + " has " + std::to_string(votes[i].size()) +
                       " votes, expected n=" + std::to_string(n));
    }
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < n; ++j) {
      const int block = vote_to_block(votes[i][j], k, i, j);
      for (std::size_t c = 0; c < k; ++c) {
        const auto col = static_cast<Eigen::Index>(c * n + j);
        if (block < 0) {
          abstain(r, col) = true;
        } else {
          values(r, col) = static_cast<std::size_t>(block) == c ? 1.0 : 0.0;
        }
      }
    }
  }
  return WeakSignalMatrix(std::move(values), std::move(abstain), n, k);
}

std::vector<std::vector<int>> to_pws_votes(const WeakSignalMatrix& w) {
  const std::size_t n = w.n();
  const std::size_t k = w.k();
  std::vector<std::vector<int>> votes(w.m(), std::vector<int>(n, 0));
  for (std::size_t i = 0; i < w.m(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t abstained = 0;
      std::size_t ones = 0;
      std::size_t block = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const auto col = static_cast<Eigen::Index>(c * n + j);
        if (w.abstain()(r, col)) {
          ++abstained;
        } else if (w.values()(r, col) == 1.0) {
          ++ones;
          block = c;
        } else if (w.values()(r, col) != 0.0) {
          throw std::invalid_argument("entry at " + at(i, static_cast<std::size_t>(col)) +
                                      " is fractional; matrix is not in PWS form");
        }
      }
      if (abstained == k) continue;
      if (abstained != 0 || ones != 1) {
        throw std::invalid_argument("point " + std::to_string(j) + " of signal " + std::to_string(i) +
                                    " is not a single vote; matrix is not in PWS form");
      }
      votes[i][j] = block_to_vote(block, k);
    }
  }
  return votes;
}

WeakSignalMatrix parse_pws_csv(std::istream& in, std::optional<std::size_t> n, std::size_t k) {
  require_classes(k);
  std::vector<std::vector<int>> votes;
  std::string line;
  std::size_t line_no = 0;
  for (; std::getline(in, line); ++line_no) {
    if (trim(line).empty()) continue;
    std::vector<int> row;
    std::string_view rest(line);
    std::size_t field = 0;
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_int(rest.substr(0, comma), line_no, field++));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!votes.empty() && row.size() != votes.front().size()) {
      throw ParseError("line " + std::to_string(line_no + 1) + " has " + std::to_string(row.size()) +
                       " fields, expected " + std::to_string(votes.front().size()));
    }
    votes.push_back(std::move(row));
  }
  if (votes.empty()) throw ParseError("weak-label file is empty");
  const std::size_t cols = votes.front().size();
  if (n && *n != cols) {
    throw ShapeError("weak-label rows have " + std::to_string(cols) + " points but n=" + std::to_string(*n));
  }
  return expand_pws(votes, cols, k);
}

WeakSignalMatrix parse_signal_json(std::istream& in, std::optional<std::size_t> n,
                                   std::optional<std::size_t> k) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  try {
    const auto file_n = doc.at("n").get<std::size_t>();
    const auto file_k = doc.at("k").get<std::size_t>();
    if (n && *n != file_n) throw ShapeError("declared n=" + std::to_string(*n) + " but file has n=" + std::to_string(file_n));
    if (k && *k != file_k) throw ShapeError("declared k=" + std::to_string(*k) + " but file has k=" + std::to_string(file_k));
    require_classes(file_k);
    const std::string format = doc.value("format", "pws");
    const auto& rows = doc.at("rows");
    if (!rows.is_array() || rows.empty()) throw ParseError("\"rows\" must be a non-empty array");

    if (format == "pws") {
      std::vector<std::vector<int>> votes;
      for (const auto& row : rows) {
        std::vector<int> parsed;
        for (const auto& v : row) {
          if (!v.is_number_integer()) throw ParseError("pws rows must hold integer votes");
          parsed.push_back(v.get<int>());
        }
        votes.push_back(std::move(parsed));
      }
      return expand_pws(votes, file_n, file_k);
    }
    if (format == "prob") {
      const auto m = static_cast<Eigen::Index>(rows.size());
      const auto cols = static_cast<Eigen::Index>(file_n * file_k);
      Eigen::MatrixXd values = Eigen::MatrixXd::Zero(m, cols);
      AbstainMask abstain = AbstainMask::Constant(m, cols, false);
      for (Eigen::Index i = 0; i < m; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
          throw ShapeError("prob row " + std::to_string(i + 1) + " must have n*k=" + std::to_string(cols) + " entries");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
          const auto& v = row[static_cast<std::size_t>(c)];
          if (v.is_null()) {
            abstain(i, c) = true;
          } else if (v.is_number()) {
            values(i, c) = v.get<double>();
          } else {
            throw ParseError("prob entries must be numbers or null");
          }
        }
      }
      return WeakSignalMatrix(std::move(values), std::move(abstain), file_n, file_k);
    }
    throw ParseError("unknown format '" + format + "' (expected \"pws\" or \"prob\")");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed weak-label JSON: ") + e.what());
  }
}

WeakSignalMatrix load_pws_matrix(const std::filesystem::path& path, std::optional<std::size_t> n,
                                 std::optional<std::size_t> k) {
  const std::string content = read_file(path);
  std::istringstream in(content);
  const auto first = content.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && content[first] == '{') return parse_signal_json(in, n, k);
  if (!k) throw std::invalid_argument("CSV weak labels need an explicit class count k");
  return parse_pws_csv(in, n, *k);
}

void write_pws_csv(std::ostream& out, const WeakSignalMatrix& w) {
  for (const auto& row : to_pws_votes(w)) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << row[j];
    }
    out << '\n';
  }
}

LabelVector parse_labels(std::istream& in, std::size_t k) {
  std::vector<int> hard;
  std::string line;
  for (std::size_t line_no = 0; std::getline(in, line); ++line_no) {
    if (trim(line).empty()) continue;
    hard.push_back(parse_int(line, line_no, 0));
  }
  if (hard.empty()) throw ParseError("label file is empty");
  return LabelVector(std::move(hard), k);
}

LabelVector load_labels(const std::filesystem::path& path, std::size_t k) {
  std::istringstream in(read_file(path));
  return parse_labels(in, k);
}

void write_labels(std::ostream& out, const LabelVector& y) {
  for (int label : y.hard()) out << label << '\n';
}

// ---------------------------------------------------------------------------

WeakSignalMatrix reduce_signals(const WeakSignalMatrix& w, std::size_t chunks) {
  if (chunks == 0) throw std::invalid_argument("chunk count must be >= 1");
  const std::size_t m = w.m();
  if (m <= chunks) return w;

  const std::size_t base = m / chunks;
  const std::size_t extra = m % chunks;
  const auto cols = static_cast<Eigen::Index>(w.cols());
  Eigen::MatrixXd values(static_cast<Eigen::Index>(chunks), cols);
  AbstainMask abstain(static_cast<Eigen::Index>(chunks), cols);

  std::size_t start = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t size = base + (c < extra ? 1 : 0);
    const auto r0 = static_cast<Eigen::Index>(start);
    const auto len = static_cast<Eigen::Index>(size);
    const auto out = static_cast<Eigen::Index>(c);
    values.row(out) = w.values().middleRows(r0, len).colwise().mean();
    abstain.row(out) = w.abstain().middleRows(r0, len).colwise().all();
    start += size;
  }
  return WeakSignalMatrix(std::move(values), std::move(abstain), w.n(), w.k());
}

double expected_error_rate(const Eigen::VectorXd& w, const LabelVector& y) {
  const std::size_t nk = y.n() * y.k();
  if (static_cast<std::size_t>(w.size()) != nk) {
    throw ShapeError("signal has length " + std::to_string(w.size()) + ", labels need " + std::to_string(nk));
  }
  const double n = static_cast<double>(y.n());
  return (-2.0 * w.dot(y.onehot()) + w.sum() + n) / static_cast<double>(nk);
}

}  // namespace onionlabel
