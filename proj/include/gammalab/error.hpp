#pragma once

#include <stdexcept>
#include <string>

namespace gammalab {

enum class ErrorKind {
    InvalidInput = 1,
    Domain = 2,
    Infeasible = 3,
    Guard = 4,
    Contract = 5,
    Io = 6,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what)
{
    if (!ok)
        fail(kind, what);
}

}  // namespace gammalab
