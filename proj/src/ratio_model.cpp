#include "rieszdr/ratio_model.hpp"

#include <algorithm>

#include "rieszdr/errors.hpp"

namespace rieszdr {

RatioModel::RatioModel(BasisExpansion basis, Link link, Eigen::VectorXd theta, bool truncated)
    : basis_(std::move(basis)), link_(link), theta_(std::move(theta)), truncated_(truncated) {
  if (theta_.size() != basis_.dim()) {
    throw SchemaMismatch("coefficient vector has size " + std::to_string(theta_.size()) +
                         " but the basis has dimension " + std::to_string(basis_.dim()));
  }
}

RatioModel RatioModel::zeros(BasisExpansion basis, Link link) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(basis.dim());
  return RatioModel(std::move(basis), link, std::move(theta));
}

RatioModel RatioModel::with_theta(Eigen::VectorXd theta) const {
  return RatioModel(basis_, link_, std::move(theta), truncated_);
}

RatioModel RatioModel::with_truncation() const {
  return RatioModel(basis_, link_, theta_, true);
}

double RatioModel::value(const Eigen::VectorXd& x) const {
  return value_from_features(basis_.features(x));
}

double RatioModel::value_from_features(const Eigen::VectorXd& phi) const {
  const double r = link_value(link_, theta_.dot(phi));
  return truncated_ ? std::max(r, 0.0) : r;
}

Eigen::VectorXd RatioModel::values(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd phi = basis_.feature_matrix(x);
  Eigen::VectorXd z = phi * theta_;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    z(i) = link_value(link_, z(i));
    if (truncated_) z(i) = std::max(z(i), 0.0);
  }
  return z;
}

nlohmann::json RatioModel::to_json() const {
  nlohmann::json j;
  j["type"] = "ratio";
  j["basis"] = basis_.to_json();
  j["link"] = link_token(link_);
  j["theta"] = std::vector<double>(theta_.begin(), theta_.end());
  j["truncated"] = truncated_;
  return j;
}

RatioModel RatioModel::from_json(const nlohmann::json& j) {
  if (j.at("type").get<std::string>() != "ratio") {
    throw SchemaMismatch("expected a model of type 'ratio'");
  }
  auto basis = BasisExpansion::from_json(j.at("basis"));
  const Link link = parse_link(j.at("link").get<std::string>());
  const auto coeffs = j.at("theta").get<std::vector<double>>();
  Eigen::VectorXd theta =
      Eigen::Map<const Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
  const bool truncated = j.value("truncated", false);
  return RatioModel(std::move(basis), link, std::move(theta), truncated);
}

RieszModel::RieszModel(RatioModel head1, RatioModel head0)
    : head1_(std::move(head1)), head0_(std::move(head0)) {
  if (head1_.basis().input_dim() != head0_.basis().input_dim()) {
    throw SchemaMismatch("representer heads must share the covariate dimension");
  }
}

double RieszModel::alpha(int d, const Eigen::VectorXd& x) const {
  const double dd = static_cast<double>(d);
  return dd * head1_.value(x) - (1.0 - dd) * head0_.value(x);
}

RieszModel RieszModel::with_thetas(Eigen::VectorXd theta1, Eigen::VectorXd theta0) const {
  return RieszModel(head1_.with_theta(std::move(theta1)), head0_.with_theta(std::move(theta0)));
}

nlohmann::json RieszModel::to_json() const {
  nlohmann::json j;
  j["type"] = "riesz";
  j["head1"] = head1_.to_json();
  j["head0"] = head0_.to_json();
  j["shared_basis"] = shared_basis();
  return j;
}

RieszModel RieszModel::from_json(const nlohmann::json& j) {
  if (j.at("type").get<std::string>() != "riesz") {
    throw SchemaMismatch("expected a model of type 'riesz'");
  }
  return RieszModel(RatioModel::from_json(j.at("head1")), RatioModel::from_json(j.at("head0")));
}

TelescopedModel::TelescopedModel(std::vector<RatioModel> stages) : stages_(std::move(stages)) {
  if (stages_.empty()) throw SchemaMismatch("telescoped model needs at least one stage");
}

double TelescopedModel::value(const Eigen::VectorXd& x) const {
  double prod = 1.0;
  for (const auto& stage : stages_) prod *= stage.value(x);
  return prod;
}

Eigen::VectorXd TelescopedModel::values(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd prod = Eigen::VectorXd::Ones(x.rows());
  for (const auto& stage : stages_) prod.array() *= stage.values(x).array();
  return prod;
}

nlohmann::json TelescopedModel::to_json() const {
  nlohmann::json j;
  j["type"] = "telescoped";
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& stage : stages_) stages.push_back(stage.to_json());
  j["stages"] = std::move(stages);
  return j;
}

TelescopedModel TelescopedModel::from_json(const nlohmann::json& j) {
  if (j.at("type").get<std::string>() != "telescoped") {
    throw SchemaMismatch("expected a model of type 'telescoped'");
  }
  std::vector<RatioModel> stages;
  for (const auto& stage : j.at("stages")) stages.push_back(RatioModel::from_json(stage));
  return TelescopedModel(std::move(stages));
}

}  // namespace rieszdr
