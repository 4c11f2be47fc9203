#include "bsumkit/stepsize.hpp"

#include <cmath>
#include <sstream>

#include "bsumkit/errors.hpp"

namespace bsum {

StepsizeSchedule StepsizeSchedule::constant(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw PreconditionError("stepsize must be positive");
  StepsizeSchedule s;
  s.constant_ = true;
  s.gamma0_ = gamma;
  return s;
}

StepsizeSchedule StepsizeSchedule::diminishing(double gamma0, double exponent, double offset) {
  if (!(gamma0 > 0.0)) throw PreconditionError("diminishing stepsize needs gamma0 > 0");
  if (!(exponent > 0.0)) throw PreconditionError("diminishing stepsize needs a positive exponent");
  if (!(offset > -1.0)) throw PreconditionError("diminishing stepsize offset must exceed -1");
  StepsizeSchedule s;
  s.constant_ = false;
  s.gamma0_ = gamma0;
  s.exponent_ = exponent;
  s.offset_ = offset;
  return s;
}

double StepsizeSchedule::at(std::size_t r) const {
  if (constant_) return gamma0_;
  return gamma0_ / std::pow(static_cast<double>(r) + offset_, exponent_);
}

double StepsizeSchedule::at_unit(std::size_t r) const {
  const double g = at(r);
  if (!(g > 0.0 && g <= 1.0)) {
    throw PreconditionError("stepsize at iteration " + std::to_string(r) + " is " +
                            std::to_string(g) + ", outside (0, 1]");
  }
  return g;
}

std::string StepsizeSchedule::describe() const {
  std::ostringstream os;
  if (constant_) {
    os << "constant(" << gamma0_ << ")";
  } else {
    os << gamma0_ << "/(r+" << offset_ << ")^" << exponent_;
  }
  return os.str();
}

}  // namespace bsum
