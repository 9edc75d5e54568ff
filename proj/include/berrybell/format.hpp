#ifndef BERRYBELL_FORMAT_HPP_
#define BERRYBELL_FORMAT_HPP_

#include <cstdint>
#include <string>

namespace berrybell
{

/// Locale-independent shortest form with at most 9 significant digits.
std::string format_number(double value);

std::string format_number(std::uint64_t value);

double degrees_to_radians(double degrees);
double radians_to_degrees(double radians);

}  // namespace berrybell

#endif  // BERRYBELL_FORMAT_HPP_
