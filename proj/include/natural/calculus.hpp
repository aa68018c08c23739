#pragma once

#include <span>

#include "natural/path_bundle.hpp"
#include "natural/process.hpp"

namespace natural {

// Predictable sequences are stored as processes whose entry k (k >= 1) is the value used
// on step k; entry 0 is ignored.

/// I_0 = 0, I_k = I_{k-1} + H_k (X_k - X_{k-1}).
Process stochastic_integral(const Process& h, const Process& x);

/// E_k = 1 for k <= u, E_k = E_{k-1} (1 + Delta_k W) for k > u.
Process doleans_exponential(const Process& w, int from_index);

/// Solution of dX = pX dW + dV on [u, N] with X_u = a, by the explicit formula
/// X_k = E_k (a + sum_{j=u+1..k} Delta_j V / E_{j-1}).  Entries before u are set to a.
/// Throws DomainError if Delta_k W <= -1 for some k > u.
Process affine_solve(int u, std::span<const double> a, const Process& w, const Process& v);
Process affine_solve(int u, double a, const Process& w, const Process& v);

/// Same equation stepped directly: X_k = X_{k-1} + (X_{k-1} + Delta_k V) Delta_k W + Delta_k V.
Process affine_recursion(int u, std::span<const double> a, const Process& w, const Process& v);

/// B_k = sum_{j<=k} E[Delta_j X Delta_j Y | F_{j-1}], from the branch tables and law probabilities.
/// Throws UnsupportedProcess when either process has no branch table (or one inconsistent
/// with its realized values), ConfigError on shape mismatch.
Process predictable_bracket(const PathBundle& bundle, const Process& x, const Process& y);

/// One-step conditional moment E[Delta_k X Delta_k Y | F_{k-1}] on path p.
double bracket_increment(const PathBundle& bundle, const Process& x, const Process& y, int p, int k);

}  // namespace natural
