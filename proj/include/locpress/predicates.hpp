#pragma once

namespace locpress {

/// Sign of the orientation determinant of (a, b, c): +1 counterclockwise,
/// -1 clockwise, 0 collinear. Exact for all finite double inputs (barring
/// underflow): a floating-point filter decides most calls, the rest fall back
/// to expansion arithmetic.
int orient2d(const double* a, const double* b, const double* c);

/// Plain floating-point determinant, twice the signed triangle area.
double orient2d_approx(const double* a, const double* b, const double* c);

}  // namespace locpress
