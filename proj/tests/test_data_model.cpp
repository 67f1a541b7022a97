#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "rieszdr/csv_io.hpp"
#include "rieszdr/data.hpp"
#include "test_support.hpp"

using namespace rieszdr;

namespace {

ObservationalDataset four_rows() {
  Eigen::MatrixXd x(4, 1);
  x << 0.1, -0.4, 2.0, 1.5;
  Eigen::VectorXd d(4);
  d << 1, 0, 1, 0;
  Eigen::VectorXd y(4);
  y << 1.0, 2.0, 3.0, 4.0;
  return validate_observational(x, d, y);
}

}  // namespace

TEST_CASE("validation accepts well-formed input") {
  const auto data = four_rows();
  CHECK(data.n() == 4);
  CHECK(data.dim() == 1);
  CHECK(data.arm_count(1) == 2);
}

TEST_CASE("validation rejects non-binary treatment") {
  Eigen::MatrixXd x(4, 1);
  x << 1, 2, 3, 4;
  Eigen::VectorXd d(4);
  d << 1, 0, 2, 0;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(validate_observational(x, d, y), NonBinaryTreatment);
}

TEST_CASE("validation rejects a single-arm sample") {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  Eigen::VectorXd d = Eigen::VectorXd::Ones(3);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(validate_observational(x, d, y), EmptyArm);
}

TEST_CASE("validation names non-finite rows") {
  Eigen::MatrixXd x(2, 1);
  x << 1.0, std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd d(2);
  d << 1, 0;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_WITH_AS(validate_observational(x, d, y), doctest::Contains("row 1"),
                       NonFiniteValue);
}

TEST_CASE("two-sample split counts rows per arm") {
  const auto data = four_rows();
  const auto treated = split_two_sample_for_ate(data, 1);
  CHECK(treated.n_nu() == 4);
  CHECK(treated.n_de() == 2);
  const auto control = split_two_sample_for_ate(data, 0);
  CHECK(control.n_de() == 2);
}

TEST_CASE("two-sample split arms partition the covariate rows") {
  const auto data = testsup::random_observational(31, 2, 99);
  const auto s1 = split_two_sample_for_ate(data, 1);
  const auto s0 = split_two_sample_for_ate(data, 0);
  CHECK(s1.n_de() + s0.n_de() == data.n());

  auto collect = [](const Eigen::MatrixXd& m, std::vector<std::pair<double, double>>& rows) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.emplace_back(m(i, 0), m(i, 1));
  };
  std::vector<std::pair<double, double>> split_rows, all_rows;
  collect(s1.de(), split_rows);
  collect(s0.de(), split_rows);
  collect(data.x(), all_rows);
  std::sort(split_rows.begin(), split_rows.end());
  std::sort(all_rows.begin(), all_rows.end());
  CHECK(split_rows == all_rows);
}

TEST_CASE("fold assignment balances sizes and partitions") {
  const auto folds = make_folds(10, 2, 7);
  CHECK(folds.fold_rows(0).size() == 5);
  CHECK(folds.fold_rows(1).size() == 5);

  const auto uneven = make_folds(5, 2, 7);
  std::vector<std::size_t> sizes = {uneven.fold_rows(0).size(), uneven.fold_rows(1).size()};
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<std::size_t>{2, 3});

  CHECK_THROWS_AS(make_folds(3, 5, 1), BadFoldCount);
  CHECK_THROWS_AS(make_folds(10, 1, 1), BadFoldCount);
}

TEST_CASE("fold assignment is a pure function of (n, K, seed)") {
  for (int k = 2; k <= 5; ++k) {
    const auto a = make_folds(23, k, 11);
    const auto b = make_folds(23, k, 11);
    CHECK(a.fold_id == b.fold_id);
    std::vector<std::size_t> sizes;
    for (int f = 0; f < k; ++f) sizes.push_back(a.fold_rows(f).size());
    CHECK(*std::min_element(sizes.begin(), sizes.end()) >= 1);
    CHECK(*std::max_element(sizes.begin(), sizes.end()) -
              *std::min_element(sizes.begin(), sizes.end()) <=
          1);
  }
  CHECK(make_folds(23, 3, 11).fold_id != make_folds(23, 3, 12).fold_id);
}

TEST_CASE("observational csv round trip") {
  const auto data = testsup::random_observational(17, 3, 5);
  const std::string path = "test_obs_roundtrip.csv";
  write_observational_csv(path, data);
  const auto back = read_observational_csv(path);
  CHECK(back.n() == data.n());
  CHECK((back.x() - data.x()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.d() == data.d());
  CHECK(back.y() == data.y());
  std::remove(path.c_str());
}

TEST_CASE("two-sample csv round trip") {
  const auto data = testsup::random_two_sample(6, 9, 2, 8);
  const std::string path = "test_ts_roundtrip.csv";
  write_two_sample_csv(path, data);
  const auto back = read_two_sample_csv(path);
  CHECK(back.n_de() == 6);
  CHECK(back.n_nu() == 9);
  CHECK((back.de() - data.de()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.nu() - data.nu()).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("csv ingestion rejects malformed input") {
  const std::string path = "test_bad.csv";
  {
    std::ofstream out(path);
    out << "x1,d,y\n1.0,1,2.0\nnot-a-number,0,1.0\n";
  }
  CHECK_THROWS_AS(read_observational_csv(path), SchemaMismatch);
  {
    std::ofstream out(path);
    out << "x1,y\n1.0,2.0\n";
  }
  CHECK_THROWS_AS(read_observational_csv(path), SchemaMismatch);
  {
    std::ofstream out(path);
    out << "x1,sample\n1.0,de\n2.0,elsewhere\n";
  }
  CHECK_THROWS_AS(read_two_sample_csv(path), SchemaMismatch);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_observational_csv("does_not_exist.csv"), DataError);
}
