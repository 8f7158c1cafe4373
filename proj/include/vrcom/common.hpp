#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace vrcom {

using Complex = std::complex<double>;

/// Invalid or inconsistent input data (parse errors, topology errors,
/// bad per-unit bases, out-of-range configuration values).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// A computation that cannot proceed at runtime (diverged solver,
/// failed calibration, I/O failure while writing results).
class RuntimeError : public std::runtime_error {
public:
    explicit RuntimeError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace vrcom
