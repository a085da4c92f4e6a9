#pragma once

// Replaces every `while` loop by a call to a fresh tail-recursive function.
//
//   while (c) { body }
//
// in function `f` becomes a call `(w1, .., wn) = f_loopK(u1, .., um);` where
// the u are the outer variables the loop uses and the w those it assigns.
//
//   fn f_loopK(u1: T1, ..) -> (W1, ..) {
//     if (c) { body; (w1, ..) = f_loopK(u1, ..); }
//     return (w1, ..);
//   }
//
// A `return` inside the loop sets an extra `done` output plus the returned
// values, and the call site returns them when `done` is set. Inner loops are
// rewritten first, so the function of an outer loop calls the inner one.

#include "slearner/heaplang.hpp"

namespace slearner {

/// Returns a type-checked copy of `p` without `while` statements.
Program loops_to_tailrec(const Program& p);

/// Number of `while` statements anywhere in `p`.
std::size_t count_loops(const Program& p);

}  // namespace slearner
