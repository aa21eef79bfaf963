#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "lpopt/errors.hpp"

namespace lpopt {

// Locale-independent, shortest round-trip decimal form.
inline std::string format_double(double x) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) {
    throw Error("format_double: conversion failed");
  }
  return std::string(buf, p);
}

inline double parse_double(std::string_view s) {
  double x = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw IoError("parse_double: bad numeric field '" + std::string(s) + "'");
  }
  return x;
}

}  // namespace lpopt
