#pragma once

#include "gofmult/distributions.hpp"

#include <string>
#include <vector>

namespace gofmult {

/// Builds a family from its identifier.
///
/// Univariate: norm, t<nu>, logis, gamma, weibull (dim must be 1).
/// Multivariate (dim 2 or 3): mvnorm, mvt<nu>, nc (normal margins, Clayton
/// copula), gn (gamma margins, normal copula), t<nu>n (t margins, normal copula).
/// Throws DomainError for unknown identifiers or unsupported dimensions.
FamilyPtr make_family(const std::string& id, int dim = 1);

/// True if the identifier names a multivariate family.
bool is_multivariate_id(const std::string& id);

}  // namespace gofmult
