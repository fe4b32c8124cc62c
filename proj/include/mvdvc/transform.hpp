#pragma once

#include <array>

namespace mvdvc {

// Separable 4x4 integer-friendly transform with orthonormal scaling, applied
// to both intra residuals and transform-domain coding units. Rows of the
// unnormalized kernel are {1,1,1,1}, {2,1,-1,-2}, {1,-1,-1,1}, {1,-2,2,-1};
// normalization folds the row norms in so fwd/inv are exact inverses up to
// floating point.
struct Transform4x4 {
  // in/out are row-major 4x4
  static void forward(const double in[16], double out[16]);
  static void inverse(const double in[16], double out[16]);

  // worst-case amplification from per-coefficient quantization error to pixel
  // error; used to size quantizer steps so pixel distortion stays bounded
  static double synthesis_gain();
};

// zigzag scan order over a 4x4 block, DC first
extern const std::array<int, 16> kZigzag4x4;

// band index of coefficient (i,j) is i*4+j; bands ordered by zigzag frequency
inline int band_of(int i, int j) { return i * 4 + j; }

}  // namespace mvdvc
