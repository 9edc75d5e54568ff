#include "berrybell/format.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace berrybell
{

std::string format_number(double value)
{
  if (std::isnan(value))
  {
    return "nan";
  }
  if (value == 0.0)
  {
    value = 0.0;  // no "-0"
  }
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, 9);
  if (result.ec != std::errc())
  {
    throw std::runtime_error("format_number: conversion failed");
  }
  return std::string(buffer, result.ptr);
}

std::string format_number(std::uint64_t value)
{
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

double degrees_to_radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

double radians_to_degrees(double radians) { return radians * 180.0 / std::numbers::pi; }

}  // namespace berrybell
