#pragma once

namespace cacq {

/// Regularized lower incomplete gamma function P(a, x) = γ(a, x) / Γ(a),
/// a > 0, x >= 0. Series expansion for x < a + 1, Lentz continued fraction
/// otherwise; absolute accuracy ~1e-14.
double gamma_p(double a, double x);

}  // namespace cacq
