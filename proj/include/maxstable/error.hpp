#pragma once

#include <charconv>
#include <stdexcept>
#include <string>

namespace maxstable {

/// A violated precondition or an invalid specification. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine stopped before reaching its tolerance. Maps to CLI exit code 4.
class ConvergenceError : public std::runtime_error
{
  public:
    ConvergenceError(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved error " + shortest(achieved) + ")"),
          achieved_(achieved)
    {
    }

    double achieved() const noexcept { return achieved_; }

  private:
    static std::string shortest(double v)
    {
        char buf[32];
        const auto r = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, r.ptr);
    }

    double achieved_;
};

/// An output could not be written. Maps to CLI exit code 3.
class IoError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message)
{
    if (!condition) {
        throw ValidationError(message);
    }
}

}  // namespace detail
}  // namespace maxstable
