#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include <zlib.h>

#include "fedac/dataset.hpp"
#include "fedac/error.hpp"

using namespace fedac;

namespace {

std::filesystem::path temp_path(const std::string &name) {
  return std::filesystem::temp_directory_path() / ("fedac_test_dataset_" + name);
}

ErrorKind kind_of(const std::string &text, std::optional<Index> dim = std::nullopt) {
  try {
    parse_libsvm(text, dim);
  } catch (const Error &e) {
    return e.kind();
  }
  return ErrorKind::usage;
}

std::string message_of(const std::string &text, std::optional<Index> dim = std::nullopt) {
  try {
    parse_libsvm(text, dim);
  } catch (const Error &e) {
    return e.what();
  }
  return "";
}

bool same(const Dataset &a, const Dataset &b) {
  return a.dim() == b.dim() && a.labels == b.labels &&
         Eigen::MatrixXd(a.features) == Eigen::MatrixXd(b.features);
}

} // namespace

TEST_CASE("single sample with two features") {
  const Dataset ds = parse_libsvm("+1 1:0.5 3:1\n");
  REQUIRE(ds.n() == 1);
  CHECK(ds.dim() == 3);
  CHECK(ds.labels[0] == 1.0);
  CHECK(ds.features.nonZeros() == 2);
  CHECK(ds.features.coeff(0, 0) == 0.5);
  CHECK(ds.features.coeff(0, 1) == 0.0);
  CHECK(ds.features.coeff(0, 2) == 1.0);
}

TEST_CASE("label-only line is an all-zero sample") {
  const Dataset ds = parse_libsvm("-1\n", 4);
  CHECK(ds.n() == 1);
  CHECK(ds.dim() == 4);
  CHECK(ds.labels[0] == -1.0);
  CHECK(ds.features.nonZeros() == 0);
}

TEST_CASE("label spellings, comments, blank lines and missing final newline") {
  const Dataset ds = parse_libsvm("1 2:3 # trailing\n\n   \n# whole-line comment\n-1 1:1\n+1 2:-2.5");
  REQUIRE(ds.n() == 3);
  CHECK(ds.labels == Vector{{1.0, -1.0, 1.0}});
  CHECK(ds.features.coeff(2, 1) == -2.5);
  CHECK(ds.dim() == 2);
}

TEST_CASE("declared dimension widens the feature space") {
  CHECK(parse_libsvm("+1 1:1\n", 123).dim() == 123);
}

TEST_CASE("parse errors name the line") {
  CHECK(kind_of("+1 1:1\nfoo 1:1\n") == ErrorKind::data);
  CHECK(message_of("+1 1:1\nfoo 1:1\n").find("line 2") != std::string::npos);
  CHECK(message_of("+1 1:1\n+2 1:1\n").find("line 2") != std::string::npos);
  CHECK(message_of("0 1:1\n").find("line 1") != std::string::npos);
  CHECK(message_of("+1 0:1\n").find("1-based") != std::string::npos);
  CHECK(message_of("+1 3:1 2:1\n").find("increasing") != std::string::npos);
  CHECK(message_of("+1 2:1 2:1\n").find("increasing") != std::string::npos);
  CHECK(message_of("+1 5:1\n", 4).find("exceeds") != std::string::npos);
  CHECK(kind_of("+1 1:x\n") == ErrorKind::data);
  CHECK(kind_of("+1 1\n") == ErrorKind::data);
  CHECK(kind_of("+1 a:1\n") == ErrorKind::data);
}

TEST_CASE("line order is sample order") {
  const Dataset ds = parse_libsvm("+1 1:1\n-1 1:2\n-1 1:3\n+1 1:4\n");
  for (Index i = 0; i < 4; ++i)
    CHECK(ds.features.coeff(i, 0) == static_cast<double>(i + 1));
}

TEST_CASE("serialization round-trips") {
  const std::string text = "+1 1:0.1 3:1e-300 7:-2\n-1\n1 2:0.30000000000000004\n";
  const Dataset ds = parse_libsvm(text, 9);
  const std::string canonical = serialize_libsvm(ds);
  CHECK(canonical == "+1 1:0.1 3:1e-300 7:-2\n-1\n+1 2:0.30000000000000004\n");
  CHECK(same(parse_libsvm(canonical, 9), ds));

  const Dataset synth = make_synthetic_binary(300, 40, 6, 12);
  CHECK(same(parse_libsvm(serialize_libsvm(synth), 40), synth));
}

TEST_CASE("stats") {
  const DatasetStats one = dataset_stats(parse_libsvm("+1 1:2\n", 5));
  CHECK(one.n == 1);
  CHECK(one.dim == 5);
  CHECK(one.max_row_norm_sq == 4.0);
  CHECK(one.mean_row_norm_sq == 4.0);

  const DatasetStats two = dataset_stats(parse_libsvm("+1 1:1 2:1 3:1\n-1 2:1\n"));
  CHECK(two.max_row_norm_sq == 3.0);
  CHECK(two.mean_row_norm_sq == 2.0);
}

TEST_CASE("hash depends on content and dimension only") {
  const Dataset a = parse_libsvm("+1 1:1\n", 3);
  const Dataset b = parse_libsvm("1   1:1.0   # same sample\n", 3);
  const Dataset c = parse_libsvm("+1 1:1\n", 4);
  const Dataset d = parse_libsvm("-1 1:1\n", 3);
  CHECK(dataset_hash(a) == dataset_hash(b));
  CHECK(dataset_hash(a) != dataset_hash(c));
  CHECK(dataset_hash(a) != dataset_hash(d));
}

TEST_CASE("synthetic data is deterministic and well formed") {
  const Dataset a = make_synthetic_binary(500, 30, 5, 3);
  const Dataset b = make_synthetic_binary(500, 30, 5, 3);
  const Dataset c = make_synthetic_binary(500, 30, 5, 4);
  CHECK(same(a, b));
  CHECK(dataset_hash(a) != dataset_hash(c));
  CHECK(a.features.nonZeros() == 500 * 5);
  CHECK((a.labels.array().abs() == 1.0).all());
  CHECK(a.labels.sum() != doctest::Approx(500.0)); // both classes occur
  CHECK(a.labels.sum() != doctest::Approx(-500.0));
}

TEST_CASE("files: plain, gzip and missing") {
  const std::string text = "+1 1:0.5 3:1\n-1 2:2\n";
  const auto plain = temp_path("plain.txt");
  std::ofstream(plain) << text;
  const Dataset from_file = load_libsvm(plain);
  CHECK(same(from_file, parse_libsvm(text)));

  const auto gz = temp_path("packed.gz");
  gzFile f = gzopen(gz.c_str(), "wb");
  REQUIRE(f != nullptr);
  gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
  gzclose(f);
  CHECK(same(load_libsvm(gz, 3), parse_libsvm(text, 3)));

  const auto bad = temp_path("bad.txt");
  std::ofstream(bad) << "+1 1:1\n+1 0:1\n";
  try {
    load_libsvm(bad);
    FAIL("expected a data error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::data);
    CHECK(std::string(e.what()).find(bad.string()) != std::string::npos);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  CHECK_THROWS_AS(load_libsvm(temp_path("does_not_exist")), Error);
  std::filesystem::remove(plain);
  std::filesystem::remove(gz);
  std::filesystem::remove(bad);
}
