#pragma once

#include <cstddef>
#include <string>

namespace bsum {

// gamma^r for r = 1, 2, ...: constant, or gamma0 / (r + offset)^exponent.
class StepsizeSchedule {
 public:
  static StepsizeSchedule constant(double gamma);
  static StepsizeSchedule diminishing(double gamma0 = 2.0, double exponent = 1.0,
                                      double offset = 2.0);

  double at(std::size_t r) const;
  // Throws unless gamma^r lies in (0, 1].
  double at_unit(std::size_t r) const;
  bool is_constant() const { return constant_; }
  std::string describe() const;

 private:
  bool constant_ = true;
  double gamma0_ = 1.0;
  double exponent_ = 1.0;
  double offset_ = 0.0;
};

}  // namespace bsum
