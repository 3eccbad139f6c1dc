#include "fedac/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include <zlib.h>

#include "fedac/error.hpp"
#include "fedac/rng.hpp"

namespace fedac {

namespace {

using StorageIndex = SparseRowMatrix::StorageIndex;

[[noreturn]] void fail(std::size_t line, const std::string &what) {
  throw Error(ErrorKind::data, "line " + std::to_string(line) + ": " + what);
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::string_view next_token(std::string_view &rest) {
  std::size_t i = 0;
  while (i < rest.size() && is_space(rest[i]))
    ++i;
  std::size_t j = i;
  while (j < rest.size() && !is_space(rest[j]))
    ++j;
  std::string_view tok = rest.substr(i, j - i);
  rest.remove_prefix(j);
  return tok;
}

bool parse_real(std::string_view s, double &out) {
  if (!s.empty() && s.front() == '+')
    s.remove_prefix(1);
  if (s.empty())
    return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_integer(std::string_view s, long long &out) {
  if (s.empty())
    return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

void append_double(std::string &out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

std::string read_gzip(const std::filesystem::path &path) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr)
    throw Error(ErrorKind::data, "cannot open " + path.string() + ": " + std::strerror(errno));
  std::string text;
  std::vector<char> buf(1 << 16);
  int got = 0;
  while ((got = gzread(file, buf.data(), static_cast<unsigned>(buf.size()))) > 0)
    text.append(buf.data(), static_cast<std::size_t>(got));
  int errnum = Z_OK;
  const char *msg = gzerror(file, &errnum);
  const std::string detail = msg ? msg : "";
  gzclose(file);
  if (got < 0 || (errnum != Z_OK && errnum != Z_STREAM_END))
    throw Error(ErrorKind::data, "gzip error in " + path.string() + ": " + detail);
  return text;
}

} // namespace

Dataset parse_libsvm(std::string_view text, std::optional<Index> declared_dim) {
  if (declared_dim && *declared_dim < 1)
    throw std::invalid_argument("parse_libsvm: declared_dim must be positive");

  std::vector<double> labels;
  std::vector<StorageIndex> outer{0};
  std::vector<StorageIndex> inner;
  std::vector<double> values;
  long long max_index = 0;

  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);

    std::string_view rest = line;
    const std::string_view label_tok = next_token(rest);
    if (label_tok.empty())
      continue;
    double label = 0.0;
    if (!parse_real(label_tok, label))
      fail(line_no, "malformed label '" + std::string(label_tok) + "'");
    if (label != 1.0 && label != -1.0)
      fail(line_no, "label '" + std::string(label_tok) + "' is not +1 or -1");

    long long previous = 0;
    for (std::string_view tok = next_token(rest); !tok.empty(); tok = next_token(rest)) {
      const auto colon = tok.find(':');
      long long index = 0;
      double value = 0.0;
      if (colon == std::string_view::npos || !parse_integer(tok.substr(0, colon), index) ||
          !parse_real(tok.substr(colon + 1), value))
        fail(line_no, "malformed feature '" + std::string(tok) + "'");
      if (index < 1)
        fail(line_no, "feature index " + std::to_string(index) + " is not 1-based");
      if (index <= previous)
        fail(line_no, "feature indices not strictly increasing at " + std::to_string(index));
      if (declared_dim && index > *declared_dim)
        fail(line_no, "feature index " + std::to_string(index) +
                          " exceeds declared dimension " + std::to_string(*declared_dim));
      if (index > std::numeric_limits<StorageIndex>::max())
        fail(line_no, "feature index too large");
      previous = index;
      inner.push_back(static_cast<StorageIndex>(index - 1));
      values.push_back(value);
    }
    max_index = std::max(max_index, previous);
    labels.push_back(label);
    outer.push_back(static_cast<StorageIndex>(inner.size()));
  }

  const Index n = static_cast<Index>(labels.size());
  const Index dim = declared_dim ? *declared_dim : static_cast<Index>(max_index);
  Dataset ds;
  ds.labels = Eigen::Map<const Vector>(labels.data(), n);
  ds.features.resize(n, dim);
  ds.features.resizeNonZeros(static_cast<Index>(values.size()));
  std::copy(values.begin(), values.end(), ds.features.valuePtr());
  std::copy(inner.begin(), inner.end(), ds.features.innerIndexPtr());
  std::copy(outer.begin(), outer.end(), ds.features.outerIndexPtr());
  return ds;
}

Dataset load_libsvm(const std::filesystem::path &path,
                    std::optional<Index> declared_dim) {
  std::string text;
  if (path.extension() == ".gz") {
    text = read_gzip(path);
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throw Error(ErrorKind::data, "cannot open " + path.string() + ": " + std::strerror(errno));
    std::ostringstream buf;
    buf << in.rdbuf();
    text = std::move(buf).str();
  }
  try {
    return parse_libsvm(text, declared_dim);
  } catch (const Error &e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string serialize_libsvm(const Dataset &ds) {
  std::string out;
  for (Index i = 0; i < ds.n(); ++i) {
    out += ds.labels[i] > 0 ? "+1" : "-1";
    for (SparseRowMatrix::InnerIterator it(ds.features, i); it; ++it) {
      out += ' ';
      out += std::to_string(it.col() + 1);
      out += ':';
      append_double(out, it.value());
    }
    out += '\n';
  }
  return out;
}

DatasetStats dataset_stats(const Dataset &ds) {
  DatasetStats stats{ds.n(), ds.dim(), 0.0, 0.0};
  double total = 0.0;
  for (Index i = 0; i < ds.n(); ++i) {
    const double sq = ds.features.row(i).squaredNorm();
    stats.max_row_norm_sq = std::max(stats.max_row_norm_sq, sq);
    total += sq;
  }
  if (ds.n() > 0)
    stats.mean_row_norm_sq = total / static_cast<double>(ds.n());
  return stats;
}

std::uint64_t dataset_hash(const Dataset &ds) {
  const std::string text = "dim=" + std::to_string(ds.dim()) + "\n" + serialize_libsvm(ds);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

Dataset make_synthetic_binary(Index n, Index dim, Index nnz_per_row,
                              std::uint64_t seed) {
  if (n < 1 || dim < 1 || nnz_per_row < 0 || nnz_per_row > dim)
    throw std::invalid_argument("make_synthetic_binary: bad shape");
  RngStream model = make_stream(seed, 0);
  RngStream rows = make_stream(seed, 1);
  const double spread = std::sqrt(static_cast<double>(std::max<Index>(nnz_per_row, 1)));
  const Vector planted = draw_gaussian(model, dim) / spread;

  std::string text;
  std::vector<Index> cols;
  for (Index i = 0; i < n; ++i) {
    cols.clear();
    while (static_cast<Index>(cols.size()) < nnz_per_row) {
      const Index c = draw_index(rows, dim);
      if (std::find(cols.begin(), cols.end(), c) == cols.end())
        cols.push_back(c);
    }
    std::sort(cols.begin(), cols.end());
    double margin = 0.0;
    for (const Index c : cols)
      margin += planted[c];
    const double p_positive = 1.0 / (1.0 + std::exp(-margin));
    text += draw_uniform(rows) < p_positive ? "+1" : "-1";
    for (const Index c : cols)
      text += " " + std::to_string(c + 1) + ":1";
    text += '\n';
  }
  return parse_libsvm(text, dim);
}

} // namespace fedac
