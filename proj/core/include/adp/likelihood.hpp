#pragma once

#include "adp/chain.hpp"

#include <limits>
#include <string>

namespace adp {

// Per-call evaluation knobs. Likelihoods ignore the fields that do not concern them.
struct EvalContext {
  // Density resolution cutoff r_t in Angstrom; infinity admits every frequency.
  double resolution = std::numeric_limits<double>::infinity();
  // Linear measurements: whitened (preconditioned) form when true, raw least squares otherwise.
  bool preconditioned = true;
};

struct Evaluation {
  double loglik = 0.0;  // <= 0; the misfit is -loglik
  Coords grad;          // d loglik / dz, 4N x 3
};

// log p(y | z) over whitened coordinates z. Implementations are immutable after construction
// and may be evaluated concurrently.
class Likelihood {
 public:
  virtual ~Likelihood() = default;
  virtual Evaluation evaluate(const Coords& z, const EvalContext& ctx = {}) const = 0;
  virtual int dim() const = 0;
  virtual std::string kind() const = 0;
};

}  // namespace adp
