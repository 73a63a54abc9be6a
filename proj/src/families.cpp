#include "gofmult/families.hpp"

#include "gofmult/errors.hpp"
#include "gofmult/sklar.hpp"

#include <charconv>
#include <memory>
#include <optional>

namespace gofmult {

namespace {

std::optional<double> parse_dof(std::string_view text) {
    if (text.empty()) return std::nullopt;
    double nu = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), nu);
    if (ec != std::errc{} || end != text.data() + text.size() || !(nu > 0.0)) return std::nullopt;
    return nu;
}

std::optional<double> dof_between(std::string_view id, std::string_view prefix, std::string_view suffix) {
    if (id.size() <= prefix.size() + suffix.size()) return std::nullopt;
    if (id.substr(0, prefix.size()) != prefix || id.substr(id.size() - suffix.size()) != suffix) return std::nullopt;
    return parse_dof(id.substr(prefix.size(), id.size() - prefix.size() - suffix.size()));
}

}  // namespace

bool is_multivariate_id(const std::string& id) {
    return id == "mvnorm" || id == "nc" || id == "gn" || dof_between(id, "mvt", "") || dof_between(id, "t", "n");
}

FamilyPtr make_family(const std::string& id, int dim) {
    if (is_multivariate_id(id)) {
        if (dim < 2 || dim > 3) throw DomainError(id + " needs dimension 2 or 3");
        if (id == "mvnorm") return std::make_shared<MvNormalFamily>(dim);
        if (auto nu = dof_between(id, "mvt", "")) return std::make_shared<MvTFamily>(dim, *nu);
        std::vector<FamilyPtr> margins;
        if (id == "nc") {
            margins.assign(static_cast<std::size_t>(dim), std::make_shared<NormalFamily>());
            return std::make_shared<SklarFamily>(id, std::move(margins), CopulaSpec{CopulaKind::Clayton});
        }
        if (id == "gn") {
            margins.assign(static_cast<std::size_t>(dim), std::make_shared<GammaFamily>());
            return std::make_shared<SklarFamily>(id, std::move(margins), CopulaSpec{CopulaKind::Normal});
        }
        const double nu = *dof_between(id, "t", "n");
        margins.assign(static_cast<std::size_t>(dim), std::make_shared<StudentTFamily>(nu));
        return std::make_shared<SklarFamily>(id, std::move(margins), CopulaSpec{CopulaKind::Normal});
    }
    if (dim != 1) throw DomainError(id + " is univariate but data has dimension " + std::to_string(dim));
    if (id == "norm") return std::make_shared<NormalFamily>();
    if (id == "logis") return std::make_shared<LogisticFamily>();
    if (id == "gamma") return std::make_shared<GammaFamily>();
    if (id == "weibull") return std::make_shared<WeibullFamily>();
    if (auto nu = dof_between(id, "t", "")) return std::make_shared<StudentTFamily>(*nu);
    throw DomainError("unknown family identifier '" + id + "'");
}

}  // namespace gofmult
