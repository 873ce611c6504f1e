#include "karman/lattice.hpp"

#include <cmath>

namespace karman {

void validate_policy(const LatticeSumPolicy &policy) {
  if (policy.truncation_K < 1)
    throw DomainError("lattice policy: truncation_K must be >= 1");
  if (!(policy.tolerance > 0.0))
    throw DomainError("lattice policy: tolerance must be > 0");
  if (policy.max_K < policy.truncation_K)
    throw DomainError("lattice policy: max_K below truncation_K");
}

LatticeSumPolicy policy_for_extent(const LatticeSumPolicy &policy, double extent_over_l) {
  LatticeSumPolicy p = policy;
  double need = std::ceil(16.0 * extent_over_l);
  if (need > double(p.truncation_K))
    p.truncation_K = static_cast<long>(need);
  if (p.max_K < 4 * p.truncation_K)
    p.max_K = 4 * p.truncation_K;
  return p;
}

TailMode parse_tail_mode(const std::string &name) {
  if (name == "none")
    return TailMode::none;
  if (name == "integral" || name == "integral-tail")
    return TailMode::integral;
  if (name == "closed-form" || name == "closed_form")
    return TailMode::closed_form;
  throw DomainError("unknown tail mode '" + name + "' (none, integral-tail, closed-form)");
}

std::string tail_mode_name(TailMode mode) {
  switch (mode) {
  case TailMode::none:
    return "none";
  case TailMode::integral:
    return "integral-tail";
  case TailMode::closed_form:
    return "closed-form";
  }
  return "?";
}

} // namespace karman
