#pragma once

namespace sfwm {

// A scalar estimate with its one-sigma statistical error.
struct ValueWithError {
  double value = 0.0;
  double stderr_ = 0.0;
};

}  // namespace sfwm
