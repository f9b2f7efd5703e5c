#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hpcpred {

// Base for every data/model error raised by the library. The CLI maps these
// to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  enum class Kind { kMalformedLine, kNumericParse };

  ParseError(Kind kind, std::size_t line_number, std::size_t field_index,
             const std::string& what)
      : Error(what), kind_(kind), line_(line_number), field_(field_index) {}

  Kind kind() const { return kind_; }
  // 1-based; 0 when the caller did not supply a line number.
  std::size_t line_number() const { return line_; }
  // 1-based field position; for kMalformedLine this is the observed field count.
  std::size_t field_index() const { return field_; }

 private:
  Kind kind_;
  std::size_t line_;
  std::size_t field_;
};

class MissingRequest : public Error {
 public:
  using Error::Error;
};

class EmptyResult : public Error {
 public:
  using Error::Error;
};

class UnknownUser : public Error {
 public:
  explicit UnknownUser(const std::string& user)
      : Error("unknown user: " + user), user_(user) {}
  const std::string& user() const { return user_; }

 private:
  std::string user_;
};

class RankDeficient : public Error {
 public:
  RankDeficient(const std::string& what, std::vector<std::size_t> columns)
      : Error(what), columns_(std::move(columns)) {}
  // Column indices that could not be resolved.
  const std::vector<std::size_t>& columns() const { return columns_; }

 private:
  std::vector<std::size_t> columns_;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class ConstantTarget : public Error {
 public:
  using Error::Error;
};

class SingleClass : public Error {
 public:
  using Error::Error;
};

class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

class MissingModel : public Error {
 public:
  using Error::Error;
};

}  // namespace hpcpred
