#include "adp/distance.hpp"

#include "adp/error.hpp"

#include <cmath>
#include <set>
#include <string>

namespace adp {

namespace {

int ca_row(int residue) { return atom_row(residue, BackboneAtom::CA); }

}  // namespace

void DistanceSet::validate() const {
  if (n_residues < 1) throw ShapeError("distance set needs a residue count");
  if (measured.size() != pairs.size())
    throw ShapeError("distance set has " + std::to_string(pairs.size()) + " pairs but " +
                     std::to_string(measured.size()) + " lengths");
  std::set<std::pair<int, int>> seen;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    auto [i, j] = pairs[p];
    if (i < 0 || j < 0 || i >= n_residues || j >= n_residues)
      throw ShapeError("distance pair index out of range");
    if (i == j) throw ShapeError("distance pair joins a residue to itself");
    if (!seen.insert({std::min(i, j), std::max(i, j)}).second)
      throw ShapeError("duplicate distance pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    if (!std::isfinite(measured[p]) || measured[p] < 0.0)
      throw ShapeError("distance lengths must be finite and nonnegative");
  }
}

Evaluation distance_loglik_grad_x(const DistanceSet& d, const Coords& x) {
  require_shape(x, kAtomsPerResidue * d.n_residues, "distance likelihood input");
  Evaluation ev;
  ev.grad = Coords::Zero(x.rows(), 3);
  for (std::size_t p = 0; p < d.pairs.size(); ++p) {
    const int i = ca_row(d.pairs[p].first);
    const int j = ca_row(d.pairs[p].second);
    const Eigen::RowVector3d diff = x.row(i) - x.row(j);
    const double dist = diff.norm();
    const double residual = d.measured[p] - dist;
    ev.loglik -= residual * residual;
    if (dist < 1e-8) continue;
    const Eigen::RowVector3d g = (2.0 * residual / dist) * diff;
    ev.grad.row(i) += g;
    ev.grad.row(j) -= g;
  }
  return ev;
}

Evaluation distance_loglik_grad(const DistanceSet& d, const CorrelatedPrior& prior, const Coords& z) {
  Evaluation ev = distance_loglik_grad_x(d, prior.apply(z));
  ev.grad = prior.apply_transpose(ev.grad);
  return ev;
}

DistanceLikelihood::DistanceLikelihood(CorrelatedPrior prior, DistanceSet distances)
    : prior_(std::move(prior)), distances_(std::move(distances)) {
  distances_.validate();
  if (kAtomsPerResidue * distances_.n_residues != prior_.dim())
    throw ShapeError("distance set and prior residue counts differ");
}

Evaluation DistanceLikelihood::evaluate(const Coords& z, const EvalContext&) const {
  return distance_loglik_grad(distances_, prior_, z);
}

}  // namespace adp
