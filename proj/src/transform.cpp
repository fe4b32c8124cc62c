#include "mvdvc/transform.hpp"

#include <cmath>

namespace mvdvc {

namespace {

// normalized kernel rows: diag(1/2, 1/sqrt(10), 1/2, 1/sqrt(10)) * C
struct Kernel {
  double t[4][4];
  Kernel() {
    const int c[4][4] = {{1, 1, 1, 1}, {2, 1, -1, -2}, {1, -1, -1, 1}, {1, -2, 2, -1}};
    const double norm[4] = {0.5, 1.0 / std::sqrt(10.0), 0.5, 1.0 / std::sqrt(10.0)};
    for (int i = 0; i < 4; i++)
      for (int j = 0; j < 4; j++) t[i][j] = norm[i] * c[i][j];
  }
};
const Kernel kT;

}  // namespace

void Transform4x4::forward(const double in[16], double out[16]) {
  double tmp[16];
  for (int i = 0; i < 4; i++)  // tmp = T * in
    for (int j = 0; j < 4; j++) {
      double s = 0;
      for (int k = 0; k < 4; k++) s += kT.t[i][k] * in[k * 4 + j];
      tmp[i * 4 + j] = s;
    }
  for (int i = 0; i < 4; i++)  // out = tmp * T'
    for (int j = 0; j < 4; j++) {
      double s = 0;
      for (int k = 0; k < 4; k++) s += tmp[i * 4 + k] * kT.t[j][k];
      out[i * 4 + j] = s;
    }
}

void Transform4x4::inverse(const double in[16], double out[16]) {
  double tmp[16];
  for (int i = 0; i < 4; i++)  // tmp = T' * in
    for (int j = 0; j < 4; j++) {
      double s = 0;
      for (int k = 0; k < 4; k++) s += kT.t[k][i] * in[k * 4 + j];
      tmp[i * 4 + j] = s;
    }
  for (int i = 0; i < 4; i++)  // out = tmp * T
    for (int j = 0; j < 4; j++) {
      double s = 0;
      for (int k = 0; k < 4; k++) s += tmp[i * 4 + k] * kT.t[k][j];
      out[i * 4 + j] = s;
    }
}

double Transform4x4::synthesis_gain() {
  // max over pixels of (sum_i |T[i][p]|)^2; columns all share the same
  // absolute sum 1 + 3/sqrt(10)
  double g = 1.0 + 3.0 / std::sqrt(10.0);
  return g * g;
}

const std::array<int, 16> kZigzag4x4 = {0, 1, 4, 8, 5, 2, 3, 6, 9, 12, 13, 10, 7, 11, 14, 15};

}  // namespace mvdvc
