#ifndef CARLEMAN_CARLEMAN_HPP
#define CARLEMAN_CARLEMAN_HPP

// Best constants of finite sections of the weighted Carleman inequality
//   sum_{n<=N} G_n <= mu_N sum_{n<=N} a_n,  G_n = prod_{k<=n} a_k^{lambda_k/Lambda_n}.

#include "carleman/asymptotics.hpp"
#include "carleman/errors.hpp"
#include "carleman/extremal.hpp"
#include "carleman/hypotheses.hpp"
#include "carleman/recursion.hpp"
#include "carleman/summation.hpp"
#include "carleman/weight_spec.hpp"
#include "carleman/weights.hpp"

#endif  // CARLEMAN_CARLEMAN_HPP
