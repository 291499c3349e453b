#pragma once

#include <stdexcept>
#include <string>

namespace hsps {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A model/operation argument is outside its mathematical domain.
struct parameter_domain_error : error {
  using error::error;
};

// An estimator is requested on data where it is undefined (zero denominators).
struct estimator_undefined_error : error {
  using error::error;
};

// Malformed input file or record ordering violation.
struct format_error : error {
  using error::error;
};

// Rank-deficient or under-determined least-squares design.
struct fit_degeneracy_error : error {
  using error::error;
};

struct io_error : error {
  using error::error;
};

// Requested run exceeds the supported pulse-counter range.
struct run_size_error : error {
  using error::error;
};

}  // namespace hsps
