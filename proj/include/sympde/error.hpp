#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sympde {

// Base for every error raised by the library. Callers that only need a
// message can catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class SyntaxError : public Error
{
  public:
    SyntaxError(std::size_t position, const std::string& message)
        : Error("syntax error at " + std::to_string(position) + ": " + message),
          position_(position)
    {
    }
    std::size_t position() const { return position_; }

  private:
    std::size_t position_;
};

class UnknownIdentifier : public Error
{
  public:
    explicit UnknownIdentifier(const std::string& name)
        : Error("unknown identifier '" + name + "'"), name_(name)
    {
    }
    const std::string& name() const { return name_; }

  private:
    std::string name_;
};

class MissingSlot : public Error
{
  public:
    explicit MissingSlot(const std::string& name)
        : Error("no value supplied for slot '" + name + "'")
    {
    }
};

class VarIndexOutOfRange : public Error
{
  public:
    VarIndexOutOfRange(std::size_t index, std::size_t size)
        : Error("variable index " + std::to_string(index) + " out of range for "
                + std::to_string(size) + " inputs")
    {
    }
};

class DimensionMismatch : public Error
{
  public:
    using Error::Error;
};

class TapeMismatch : public Error
{
  public:
    TapeMismatch() : Error("values recorded on different tapes") {}
};

class UnsupportedDerivative : public Error
{
  public:
    using Error::Error;
};

class UnknownBenchmark : public Error
{
  public:
    explicit UnknownBenchmark(const std::string& name)
        : Error("unknown benchmark '" + name + "'")
    {
    }
};

class ConfigError : public Error
{
  public:
    using Error::Error;
};

class AllDiverged : public Error
{
  public:
    AllDiverged() : Error("every restart diverged") {}
};

}  // namespace sympde
