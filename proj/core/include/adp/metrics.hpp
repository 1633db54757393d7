#pragma once

#include "adp/chain.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace adp {

enum class AtomSelection { ca_only, backbone };
enum class Alignment { none, rigid };

const char* to_string(Alignment a);

struct Superposition {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  // Apply to row-vector points: p' = p R^T + t^T.
  Coords apply(const Coords& points) const;
};

// Least-squares superposition of `mobile` onto `reference` (same row count). With
// allow_reflection = false the determinant of the rotation is forced to +1.
Superposition kabsch(const Coords& mobile, const Coords& reference, bool allow_reflection = false);

struct RmsdResult {
  double rmsd = 0.0;
  int atoms = 0;
  // Rigid mode only: RMSD after the best improper superposition, and whether it beats rmsd.
  double mirror_rmsd = 0.0;
  bool mirror_better = false;
};

// Rows where the target is present (and the prediction too). Throws ShapeError when the chains
// differ in length or share no atoms of the selection.
RmsdResult rmsd_detail(const BackboneChain& pred, const BackboneChain& target, AtomSelection atoms,
                       Alignment align);
double rmsd(const BackboneChain& pred, const BackboneChain& target,
            AtomSelection atoms = AtomSelection::ca_only, Alignment align = Alignment::none);

struct CompletenessPoint {
  double completeness = 0.0;  // included CA atoms / CA atoms present in the target
  double rmsd = 0.0;
};

// For k = 1 .. available: RMSD of the k best-fitting CA atoms, no alignment. The curve is
// nondecreasing in completeness.
std::vector<CompletenessPoint> rmsd_vs_completeness(const BackboneChain& pred, const BackboneChain& target);

struct MetricRecord {
  std::string replica;  // replica index, or "best" for the best-of-replicas summary
  std::string task;
  double rmsd = 0.0;
  double completeness = 1.0;
  double loss = 0.0;
};

// Header `replica,task,rmsd,completeness,loss`; numbers with 17 significant digits.
void write_metrics_csv(const std::vector<MetricRecord>& records, std::ostream& out);
void write_completeness_csv(const std::vector<std::pair<std::string, std::vector<CompletenessPoint>>>& curves,
                            std::ostream& out);

}  // namespace adp
