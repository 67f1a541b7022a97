#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "rieszdr/basis.hpp"
#include "rieszdr/data.hpp"

namespace rieszdr {

/**
 * Model token grammar:
 *   linear:poly:<degree>
 *   linear:rbf:<m>:<sigma|median>
 *   kulsif:<sigma|median>:<lambda|loocv-grid>
 */
struct ModelSpec {
  enum class Family { LinearPoly, LinearRbf, Kulsif };
  Family family = Family::LinearPoly;
  int degree = 1;                        // linear:poly
  int rbf_centers = 20;                  // linear:rbf
  std::optional<double> bandwidth;       // nullopt = median heuristic
  std::optional<double> kulsif_lambda;   // nullopt = loocv grid

  static ModelSpec parse(const std::string& token);
  std::string token() const;
};

/**
 * Materializes the basis against rows that anchor data-dependent pieces:
 * rbf centers are a seeded subsample of the rows and the median-heuristic
 * bandwidth is computed over all of them.
 */
BasisExpansion build_basis(const ModelSpec& spec, const Eigen::MatrixXd& rows,
                           std::uint64_t seed);

/// Default ladder for kulsif lambda selection when none is given.
inline constexpr double kDefaultLambdaGrid[] = {1e-3, 1e-2, 1e-1, 1.0, 10.0};

}  // namespace rieszdr
