#pragma once

#include <cmath>
#include <stdexcept>

namespace qnc {

struct MessagePrior;  // message_model.hpp

// Uniform symmetric grid of PDF bins over [-half_width, half_width].
// Bin j covers [-R + j*h, -R + (j+1)*h] and is represented by its center;
// discretized PDFs store per-bin probability mass (summing to 1).
struct Grid {
  double half_width = 0.0;
  int points = 0;  // power of two (FFT-friendly)

  double spacing() const { return 2.0 * half_width / points; }
  double center(int j) const {
    return -half_width + (j + 0.5) * spacing();
  }

  void validate() const {
    if (points < 2 || (points & (points - 1)) != 0)
      throw std::invalid_argument("grid: points must be a power of two >= 2");
    if (!(half_width > 0))
      throw std::invalid_argument("grid: half_width must be positive");
  }
};

}  // namespace qnc
