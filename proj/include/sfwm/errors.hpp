#pragma once

#include <stdexcept>
#include <string>

namespace sfwm {

// Base class for everything this library throws. The CLI maps
// config_error to exit code 2 and any other sfwm::error to exit code 3.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Config/schema violations (bad keys, missing units, malformed files).
struct config_error : error {
  using error::error;
};

// Input outside the physical or numerical domain of an operation.
struct domain_error : error {
  using error::error;
};

// A dual-pump operation was asked to handle tau_p == 0.
struct degenerate_config_error : domain_error {
  using domain_error::domain_error;
};

// Numerical failures: solver did not bracket, estimator undefined, ...
struct numerical_error : error {
  using error::error;
};

struct no_phasematch_error : numerical_error {
  using numerical_error::numerical_error;
};

// Estimator denominator is zero (no counts where counts are required).
struct estimator_error : numerical_error {
  using numerical_error::numerical_error;
};

// Data contradicts the model assumptions (e.g. baseline above peak).
struct inconsistent_data_error : numerical_error {
  using numerical_error::numerical_error;
};

// Count curves carry no identifiable peak to fit.
struct identifiability_error : numerical_error {
  using numerical_error::numerical_error;
};

// Two grids disagree on axes; caller must resample explicitly.
struct axis_mismatch_error : numerical_error {
  using numerical_error::numerical_error;
};

// An operation received input violating its documented contract.
struct contract_error : error {
  using error::error;
};

}  // namespace sfwm
