#ifndef ADSG_DATASET_HPP
#define ADSG_DATASET_HPP

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>
#include <Eigen/Dense>

namespace adsg {

using index_t = std::uint32_t;

class parse_error : public std::runtime_error {
 public:
  parse_error(std::size_t line, const std::string &what)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Read-only view of one stored row of the design matrix.
struct SparseRow {
  std::span<const index_t> indices;
  std::span<const double> values;

  std::size_t nnz() const noexcept { return indices.size(); }

  double dot(const Eigen::VectorXd &v) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < indices.size(); ++k) acc += values[k] * v[indices[k]];
    return acc;
  }

  double squared_norm() const {
    double acc = 0.0;
    for (double a : values) acc += a * a;
    return acc;
  }

  /// Positions [first, last) of the stored entries whose index lies in [lo, hi).
  std::pair<std::size_t, std::size_t> range(std::size_t lo, std::size_t hi) const {
    auto b = std::lower_bound(indices.begin(), indices.end(), lo);
    auto e = std::lower_bound(b, indices.end(), hi);
    return {static_cast<std::size_t>(b - indices.begin()),
            static_cast<std::size_t>(e - indices.begin())};
  }
};

/// Immutable row-compressed design matrix plus labels.
///
/// Indices are 0-based and strictly increasing inside each row. Explicit zeros
/// are kept as stored entries.
class Dataset {
 public:
  Dataset(std::size_t dim, std::vector<std::size_t> row_ptr, std::vector<index_t> indices,
          std::vector<double> values, std::vector<double> labels)
      : dim_(dim),
        row_ptr_(std::move(row_ptr)),
        indices_(std::move(indices)),
        values_(std::move(values)),
        labels_(std::move(labels)) {
    validate();
  }

  std::size_t n() const noexcept { return labels_.size(); }
  std::size_t d() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return values_.size(); }
  double label(std::size_t i) const { return labels_[i]; }
  std::span<const double> labels() const noexcept { return labels_; }

  SparseRow row(std::size_t i) const {
    const auto b = row_ptr_[i], e = row_ptr_[i + 1];
    return {std::span<const index_t>(indices_.data() + b, e - b),
            std::span<const double>(values_.data() + b, e - b)};
  }

  /// A x, one entry per sample.
  Eigen::VectorXd margins(const Eigen::VectorXd &x) const {
    Eigen::VectorXd out(n());
    for (std::size_t i = 0; i < n(); ++i) out[i] = row(i).dot(x);
    return out;
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n()),
                                              static_cast<Eigen::Index>(d()));
    for (std::size_t i = 0; i < n(); ++i) {
      auto r = row(i);
      for (std::size_t k = 0; k < r.nnz(); ++k) a(i, r.indices[k]) = r.values[k];
    }
    return a;
  }

  /// Same rows with the feature dimension raised to `dim` (train/test alignment).
  Dataset with_dimension(std::size_t dim) const {
    if (dim < dim_) throw std::invalid_argument("with_dimension: cannot shrink dimension");
    return Dataset(dim, row_ptr_, indices_, values_, labels_);
  }

  /// Rows permuted by `order` (a permutation of 0..n-1).
  Dataset permuted(std::span<const std::size_t> order) const;

 private:
  void validate() const {
    if (labels_.empty()) throw std::invalid_argument("Dataset: n must be >= 1");
    if (dim_ == 0) throw std::invalid_argument("Dataset: d must be >= 1");
    if (row_ptr_.size() != labels_.size() + 1 || row_ptr_.front() != 0 ||
        row_ptr_.back() != values_.size() || indices_.size() != values_.size())
      throw std::invalid_argument("Dataset: inconsistent row storage");
    for (std::size_t i = 0; i + 1 < row_ptr_.size(); ++i) {
      if (row_ptr_[i] > row_ptr_[i + 1]) throw std::invalid_argument("Dataset: bad row_ptr");
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        if (indices_[k] >= dim_) throw std::invalid_argument("Dataset: index out of range");
        if (k > row_ptr_[i] && indices_[k] <= indices_[k - 1])
          throw std::invalid_argument("Dataset: row indices must be strictly increasing");
      }
    }
  }

  std::size_t dim_;
  std::vector<std::size_t> row_ptr_;
  std::vector<index_t> indices_;
  std::vector<double> values_;
  std::vector<double> labels_;
};

inline Dataset Dataset::permuted(std::span<const std::size_t> order) const {
  if (order.size() != n()) throw std::invalid_argument("permuted: order has wrong length");
  std::vector<std::size_t> ptr{0};
  std::vector<index_t> idx;
  std::vector<double> val, lab;
  idx.reserve(nnz());
  val.reserve(nnz());
  for (std::size_t i : order) {
    auto r = row(i);
    idx.insert(idx.end(), r.indices.begin(), r.indices.end());
    val.insert(val.end(), r.values.begin(), r.values.end());
    lab.push_back(labels_[i]);
    ptr.push_back(idx.size());
  }
  return Dataset(dim_, std::move(ptr), std::move(idx), std::move(val), std::move(lab));
}

/// Incremental row-by-row construction.
class DatasetBuilder {
 public:
  void add_row(double label, std::span<const index_t> indices, std::span<const double> values) {
    if (indices.size() != values.size())
      throw std::invalid_argument("add_row: indices/values length mismatch");
    indices_.insert(indices_.end(), indices.begin(), indices.end());
    values_.insert(values_.end(), values.begin(), values.end());
    labels_.push_back(label);
    row_ptr_.push_back(indices_.size());
    for (index_t j : indices) max_dim_ = std::max<std::size_t>(max_dim_, std::size_t{j} + 1);
  }

  std::size_t rows() const noexcept { return labels_.size(); }

  Dataset build(std::size_t min_dim = 0) && {
    return Dataset(std::max(max_dim_, std::max<std::size_t>(min_dim, 1)), std::move(row_ptr_),
                   std::move(indices_), std::move(values_), std::move(labels_));
  }

 private:
  std::vector<std::size_t> row_ptr_{0};
  std::vector<index_t> indices_;
  std::vector<double> values_;
  std::vector<double> labels_;
  std::size_t max_dim_ = 0;
};

inline Dataset from_dense(const Eigen::MatrixXd &a, const Eigen::VectorXd &labels,
                          bool keep_zeros = false) {
  if (a.rows() != labels.size()) throw std::invalid_argument("from_dense: row/label mismatch");
  DatasetBuilder b;
  std::vector<index_t> idx;
  std::vector<double> val;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    idx.clear();
    val.clear();
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (keep_zeros || a(i, j) != 0.0) {
        idx.push_back(static_cast<index_t>(j));
        val.push_back(a(i, j));
      }
    }
    b.add_row(labels[i], idx, val);
  }
  return std::move(b).build(static_cast<std::size_t>(a.cols()));
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n\v\f";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline bool parse_double(std::string_view tok, double &out) {
  // from_chars rejects a leading '+', which LibSVM writers commonly emit.
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && p == tok.data() + tok.size();
}

}  // namespace detail

/// Parse LibSVM text: `label idx:val ...` per line, 1-based ascending indices,
/// `#` starts a comment. The feature dimension is the largest index seen,
/// raised to `min_dim` when that is larger.
inline Dataset parse_libsvm(std::istream &in, std::size_t min_dim = 0) {
  DatasetBuilder builder;
  std::vector<index_t> idx;
  std::vector<double> val;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv(line);
    if (auto c = sv.find('#'); c != std::string_view::npos) sv = sv.substr(0, c);
    sv = detail::trim(sv);
    if (sv.empty()) continue;

    idx.clear();
    val.clear();
    double label = 0.0;
    bool have_label = false;
    std::size_t pos = 0;
    while (pos < sv.size()) {
      while (pos < sv.size() && (sv[pos] == ' ' || sv[pos] == '\t')) ++pos;
      if (pos >= sv.size()) break;
      auto end = sv.find_first_of(" \t", pos);
      if (end == std::string_view::npos) end = sv.size();
      auto tok = sv.substr(pos, end - pos);
      pos = end;
      if (!have_label) {
        if (!detail::parse_double(tok, label))
          throw parse_error(lineno, "malformed label '" + std::string(tok) + "'");
        have_label = true;
        continue;
      }
      auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw parse_error(lineno, "malformed token '" + std::string(tok) + "'");
      auto key = tok.substr(0, colon);
      long long one_based = 0;
      auto [p, ec] = std::from_chars(key.data(), key.data() + key.size(), one_based);
      if (ec != std::errc() || p != key.data() + key.size())
        throw parse_error(lineno, "malformed index '" + std::string(key) + "'");
      if (one_based < 1) throw parse_error(lineno, "index < 1");
      if (one_based - 1 > static_cast<long long>(UINT32_MAX - 1))
        throw parse_error(lineno, "index too large");
      double v = 0.0;
      if (!detail::parse_double(tok.substr(colon + 1), v))
        throw parse_error(lineno, "malformed value in '" + std::string(tok) + "'");
      auto j = static_cast<index_t>(one_based - 1);
      if (!idx.empty() && j <= idx.back())
        throw parse_error(lineno, j == idx.back() ? "duplicate index" : "non-ascending index");
      idx.push_back(j);
      val.push_back(v);
    }
    builder.add_row(label, idx, val);
  }
  if (builder.rows() == 0) throw parse_error(0, "empty input");
  return std::move(builder).build(min_dim);
}

inline Dataset parse_libsvm(std::string_view text, std::size_t min_dim = 0) {
  std::istringstream in{std::string(text)};
  return parse_libsvm(in, min_dim);
}

/// Load a LibSVM file; names ending in `.gz` are decompressed with zlib.
inline Dataset load_libsvm(const std::string &path, std::size_t min_dim = 0) {
  const bool gz = path.size() >= 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
  if (!gz) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    return parse_libsvm(f, min_dim);
  }
  std::unique_ptr<gzFile_s, decltype(&gzclose)> f(gzopen(path.c_str(), "rb"), &gzclose);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string text;
  char buf[1 << 16];
  int got = 0;
  while ((got = gzread(f.get(), buf, sizeof(buf))) > 0) text.append(buf, static_cast<std::size_t>(got));
  if (got < 0) throw std::runtime_error("gzip read error in " + path);
  return parse_libsvm(text, min_dim);
}

/// Serialize back to LibSVM text (1-based indices, round-trip precision).
inline std::string to_libsvm(const Dataset &ds) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < ds.n(); ++i) {
    auto r = std::to_chars(buf, buf + sizeof(buf), ds.label(i));
    out.append(buf, r.ptr);
    auto row = ds.row(i);
    for (std::size_t k = 0; k < row.nnz(); ++k) {
      out.push_back(' ');
      r = std::to_chars(buf, buf + sizeof(buf), std::size_t{row.indices[k]} + 1);
      out.append(buf, r.ptr);
      out.push_back(':');
      r = std::to_chars(buf, buf + sizeof(buf), row.values[k]);
      out.append(buf, r.ptr);
    }
    out.push_back('\n');
  }
  return out;
}

/// nnz / (n d).
inline double sparsity(const Dataset &ds) {
  return static_cast<double>(ds.nnz()) /
         (static_cast<double>(ds.n()) * static_cast<double>(ds.d()));
}

/// Contiguous partition of [0, d) into B blocks of width ceil(d / B). When B
/// does not divide d the trailing blocks are short (possibly empty).
class BlockPartition {
 public:
  BlockPartition(std::size_t d, std::size_t blocks) : d_(d), blocks_(blocks) {
    if (blocks == 0 || d == 0 || blocks > d)
      throw std::invalid_argument("make_partition: need 1 <= B <= d");
    width_ = (d + blocks - 1) / blocks;
  }

  std::size_t dim() const noexcept { return d_; }
  std::size_t blocks() const noexcept { return blocks_; }
  /// Nominal block size (Omega).
  std::size_t width() const noexcept { return width_; }

  std::size_t begin(std::size_t l) const noexcept { return std::min(l * width_, d_); }
  std::size_t end(std::size_t l) const noexcept { return std::min((l + 1) * width_, d_); }
  std::size_t size(std::size_t l) const noexcept { return end(l) - begin(l); }
  std::size_t block_of(std::size_t j) const noexcept { return j / width_; }

 private:
  std::size_t d_;
  std::size_t blocks_;
  std::size_t width_;
};

inline BlockPartition make_partition(std::size_t d, std::size_t blocks) {
  return BlockPartition(d, blocks);
}

/// <[a_i]_l, [v]_l>, visiting only the stored entries of row i inside block l.
inline double row_block_dot(const Dataset &ds, std::size_t i, const Eigen::VectorXd &v,
                            const BlockPartition &part, std::size_t l) {
  if (i >= ds.n() || l >= part.blocks() || static_cast<std::size_t>(v.size()) != ds.d() ||
      part.dim() != ds.d())
    throw std::invalid_argument("row_block_dot: index or dimension out of range");
  auto row = ds.row(i);
  auto [b, e] = row.range(part.begin(l), part.end(l));
  double acc = 0.0;
  for (auto k = b; k < e; ++k) acc += row.values[k] * v[row.indices[k]];
  return acc;
}

}  // namespace adsg

#endif
