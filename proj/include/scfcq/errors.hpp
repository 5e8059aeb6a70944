#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace scfcq {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Weighted design matrix has rank < p on the weight-positive rows.
class DegenerateDesign : public Error {
public:
  explicit DegenerateDesign(const std::string& msg) : Error(msg) {}
};

// Basis argument outside [lo, hi] by more than numeric slack.
class OutOfSupport : public Error {
public:
  OutOfSupport(double value, double lo, double hi, long index = -1)
      : Error("basis argument " + std::to_string(value) + " outside support [" +
              std::to_string(lo) + ", " + std::to_string(hi) + "]" +
              (index >= 0 ? " at row " + std::to_string(index) : "")),
        value(value), index(index) {}
  double value;
  long index;
};

// Upper conditional-quantile fit fell below the lower one somewhere.
class QuantileCrossing : public Error {
public:
  explicit QuantileCrossing(std::vector<long> idx)
      : Error("first-stage scale nonpositive at " + std::to_string(idx.size()) +
              " observation(s)"),
        indices(std::move(idx)) {}
  std::vector<long> indices;
};

class BandwidthTooSmall : public Error {
public:
  explicit BandwidthTooSmall(const std::string& msg) : Error(msg) {}
};

// All fitted values nonpositive: the quantile grid has descended below usable data.
class NoPositiveFits : public Error {
public:
  NoPositiveFits() : Error("no strictly positive fitted values") {}
};

class InsufficientSubsample : public Error {
public:
  InsufficientSubsample(long have, long need)
      : Error("selected subsample too small: " + std::to_string(have) +
              " weight-positive rows, need " + std::to_string(need)),
        have(have), need(need) {}
  long have;
  long need;
};

class TooManyFailures : public Error {
public:
  TooManyFailures(long failed, long total)
      : Error(std::to_string(failed) + " of " + std::to_string(total) +
              " runs failed"),
        failed(failed), total(total) {}
  long failed;
  long total;
};

class NoBracket : public Error {
public:
  explicit NoBracket(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
public:
  ConfigError(const std::string& field, const std::string& reason)
      : Error("config error at '" + field + "': " + reason), field(field) {}
  std::string field;
};

class CsvError : public Error {
public:
  CsvError(const std::string& msg, long line = -1)
      : Error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line(line) {}
  long line;
};

}  // namespace scfcq
