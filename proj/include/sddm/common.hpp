#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace sddm {

// Error taxonomy. The CLI maps these onto its exit codes: InputError -> 2,
// ParamError -> 3, everything else that escapes -> nonzero failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unacceptable input data (parse failures, structural rejects).
class InputError : public Error {
 public:
  using Error::Error;
};

// Out-of-range or inconsistent run parameters.
class ParamError : public Error {
 public:
  using Error::Error;
};

// A documented internal invariant failed to hold.
class InvariantError : public Error {
 public:
  using Error::Error;
};

// Iterative routine did not converge; carries the last estimate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double estimate)
      : Error(what), last_estimate(estimate) {}
  double last_estimate;
};

// Deterministic RNG used everywhere randomness is needed. std::mt19937_64 has
// a fully specified output sequence; the distributions below avoid the
// implementation-defined std:: distribution wrappers so that streams are
// reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive range
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  // standard normal via Box-Muller
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sddm
