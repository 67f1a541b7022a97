#include "rieszdr/basis.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rieszdr/errors.hpp"

namespace rieszdr {

namespace {

double softplus(double z) {
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double link_value(Link link, double z) {
  switch (link) {
    case Link::Identity: return z;
    case Link::Exp: return std::exp(z);
    case Link::Sigmoid: return sigmoid(z);
    case Link::SoftplusShift: return 1.0 + softplus(z);
  }
  return z;
}

double link_deriv(Link link, double z) {
  switch (link) {
    case Link::Identity: return 1.0;
    case Link::Exp: return std::exp(z);
    case Link::Sigmoid: {
      const double s = sigmoid(z);
      return s * (1.0 - s);
    }
    case Link::SoftplusShift: return sigmoid(z);
  }
  return 1.0;
}

Link parse_link(const std::string& token) {
  if (token == "identity") return Link::Identity;
  if (token == "exp") return Link::Exp;
  if (token == "sigmoid") return Link::Sigmoid;
  if (token == "softplus-shift") return Link::SoftplusShift;
  throw UsageError("unknown link '" + token + "'");
}

std::string link_token(Link link) {
  switch (link) {
    case Link::Identity: return "identity";
    case Link::Exp: return "exp";
    case Link::Sigmoid: return "sigmoid";
    case Link::SoftplusShift: return "softplus-shift";
  }
  return "identity";
}

BasisExpansion BasisExpansion::polynomial(Eigen::Index input_dim, int degree) {
  if (input_dim < 1) throw UsageError("polynomial basis needs input_dim >= 1");
  if (degree < 0) throw UsageError("polynomial degree must be >= 0");
  BasisExpansion b;
  b.kind_ = Kind::Polynomial;
  b.input_dim_ = input_dim;
  b.degree_ = degree;
  return b;
}

BasisExpansion BasisExpansion::gaussian(Eigen::MatrixXd centers, double bandwidth) {
  if (centers.rows() < 1) throw UsageError("gaussian basis needs at least one center");
  if (!(bandwidth > 0.0)) throw UsageError("gaussian basis bandwidth must be > 0");
  BasisExpansion b;
  b.kind_ = Kind::Gaussian;
  b.input_dim_ = centers.cols();
  b.centers_ = std::move(centers);
  b.bandwidth_ = bandwidth;
  return b;
}

Eigen::Index BasisExpansion::dim() const {
  if (kind_ == Kind::Polynomial) return 1 + input_dim_ * degree_;
  return 1 + centers_.rows();
}

Eigen::VectorXd BasisExpansion::features(const Eigen::VectorXd& x) const {
  if (x.size() != input_dim_) {
    throw SchemaMismatch("basis expects dimension " + std::to_string(input_dim_) + ", got " +
                         std::to_string(x.size()));
  }
  Eigen::VectorXd phi(dim());
  phi(0) = 1.0;
  if (kind_ == Kind::Polynomial) {
    Eigen::Index k = 1;
    Eigen::VectorXd pow = Eigen::VectorXd::Ones(input_dim_);
    for (int p = 1; p <= degree_; ++p) {
      pow.array() *= x.array();
      phi.segment(k, input_dim_) = pow;
      k += input_dim_;
    }
  } else {
    const double denom = 2.0 * bandwidth_ * bandwidth_;
    for (Eigen::Index l = 0; l < centers_.rows(); ++l) {
      phi(1 + l) = std::exp(-(x - centers_.row(l).transpose()).squaredNorm() / denom);
    }
  }
  return phi;
}

Eigen::MatrixXd BasisExpansion::feature_matrix(const Eigen::MatrixXd& x) const {
  if (kind_ == Kind::Gaussian) {
    if (x.cols() != input_dim_) {
      throw SchemaMismatch("basis expects dimension " + std::to_string(input_dim_) + ", got " +
                           std::to_string(x.cols()));
    }
    // |x_i - c_l|^2 = |x_i|^2 + |c_l|^2 - 2 x_i . c_l, batched over all rows
    Eigen::MatrixXd d2 = -2.0 * x * centers_.transpose();
    d2.colwise() += x.rowwise().squaredNorm();
    d2.rowwise() += centers_.rowwise().squaredNorm().transpose();
    Eigen::MatrixXd phi(x.rows(), dim());
    phi.col(0).setOnes();
    phi.rightCols(centers_.rows()) =
        (-d2.array().max(0.0) / (2.0 * bandwidth_ * bandwidth_)).exp();
    return phi;
  }
  Eigen::MatrixXd phi(x.rows(), dim());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    phi.row(i) = features(x.row(i).transpose()).transpose();
  }
  return phi;
}

nlohmann::json BasisExpansion::to_json() const {
  nlohmann::json j;
  if (kind_ == Kind::Polynomial) {
    j["kind"] = "polynomial";
    j["input_dim"] = input_dim_;
    j["degree"] = degree_;
  } else {
    j["kind"] = "gaussian";
    j["bandwidth"] = bandwidth_;
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < centers_.rows(); ++i) {
      rows.emplace_back(centers_.row(i).begin(), centers_.row(i).end());
    }
    j["centers"] = rows;
  }
  return j;
}

BasisExpansion BasisExpansion::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "polynomial") {
    return polynomial(j.at("input_dim").get<Eigen::Index>(), j.at("degree").get<int>());
  }
  if (kind == "gaussian") {
    const auto rows = j.at("centers").get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw SchemaMismatch("gaussian basis has no centers");
    Eigen::MatrixXd centers(static_cast<Eigen::Index>(rows.size()),
                            static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows[0].size()) throw SchemaMismatch("ragged center rows");
      for (std::size_t k = 0; k < rows[i].size(); ++k) {
        centers(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
      }
    }
    return gaussian(std::move(centers), j.at("bandwidth").get<double>());
  }
  throw SchemaMismatch("unknown basis kind '" + kind + "'");
}

bool BasisExpansion::operator==(const BasisExpansion& other) const {
  if (kind_ != other.kind_ || input_dim_ != other.input_dim_) return false;
  if (kind_ == Kind::Polynomial) return degree_ == other.degree_;
  return bandwidth_ == other.bandwidth_ && centers_.rows() == other.centers_.rows() &&
         centers_ == other.centers_;
}

double median_pairwise_distance(const Eigen::MatrixXd& rows) {
  const Eigen::Index n = rows.rows();
  if (n < 2) return 1.0;
  // Evenly strided subset keeps the pair count bounded and the result
  // a pure function of the input.
  const Eigen::Index cap = 512;
  const Eigen::Index stride = n <= cap ? 1 : (n + cap - 1) / cap;
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < n; i += stride) idx.push_back(i);

  std::vector<double> dists;
  dists.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      dists.push_back((rows.row(idx[a]) - rows.row(idx[b])).norm());
    }
  }
  if (dists.empty()) return 1.0;
  auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  const double med = *mid;
  return med > 0.0 ? med : 1.0;
}

}  // namespace rieszdr
