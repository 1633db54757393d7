#include "adp/metrics.hpp"

#include "adp/error.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace adp {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<int> selected_rows(const BackboneChain& pred, const BackboneChain& target, AtomSelection atoms) {
  if (pred.n_residues != target.n_residues)
    throw ShapeError("RMSD needs equal residue counts (" + std::to_string(pred.n_residues) + " vs " +
                     std::to_string(target.n_residues) + ")");
  std::vector<int> rows;
  for (int row = 0; row < target.dim(); ++row) {
    if (atoms == AtomSelection::ca_only && row % kAtomsPerResidue != static_cast<int>(BackboneAtom::CA)) continue;
    if (target.present[static_cast<std::size_t>(row)] && pred.present[static_cast<std::size_t>(row)])
      rows.push_back(row);
  }
  if (rows.empty()) throw ShapeError("RMSD: prediction and target share no present atoms");
  return rows;
}

Coords gather(const Coords& x, const std::vector<int>& rows) {
  Coords out(static_cast<int>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<int>(i)) = x.row(rows[i]);
  return out;
}

double rms(const Coords& a, const Coords& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.rows()));
}

}  // namespace

const char* to_string(Alignment a) { return a == Alignment::none ? "none" : "rigid"; }

Coords Superposition::apply(const Coords& points) const {
  Coords out = points * rotation.transpose();
  out.rowwise() += translation.transpose();
  return out;
}

Superposition kabsch(const Coords& mobile, const Coords& reference, bool allow_reflection) {
  if (mobile.rows() != reference.rows() || mobile.rows() == 0)
    throw ShapeError("kabsch needs two equal, nonempty point sets");
  const Eigen::RowVector3d cm = mobile.colwise().mean();
  const Eigen::RowVector3d cr = reference.colwise().mean();
  const Eigen::MatrixXd p = mobile.rowwise() - cm;
  const Eigen::MatrixXd q = reference.rowwise() - cr;
  const Eigen::Matrix3d h = p.transpose() * q;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if (!allow_reflection && (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  Superposition s;
  s.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  s.translation = cr.transpose() - s.rotation * cm.transpose();
  return s;
}

RmsdResult rmsd_detail(const BackboneChain& pred, const BackboneChain& target, AtomSelection atoms,
                       Alignment align) {
  pred.validate();
  target.validate();
  const std::vector<int> rows = selected_rows(pred, target, atoms);
  const Coords p = gather(pred.coords, rows);
  const Coords q = gather(target.coords, rows);
  RmsdResult out;
  out.atoms = static_cast<int>(rows.size());
  if (align == Alignment::none) {
    out.rmsd = rms(p, q);
    return out;
  }
  out.rmsd = rms(kabsch(p, q, false).apply(p), q);
  out.mirror_rmsd = rms(kabsch(p, q, true).apply(p), q);
  out.mirror_better = out.mirror_rmsd < out.rmsd - 1e-9;
  return out;
}

double rmsd(const BackboneChain& pred, const BackboneChain& target, AtomSelection atoms, Alignment align) {
  return rmsd_detail(pred, target, atoms, align).rmsd;
}

std::vector<CompletenessPoint> rmsd_vs_completeness(const BackboneChain& pred, const BackboneChain& target) {
  const std::vector<int> rows = selected_rows(pred, target, AtomSelection::ca_only);
  int target_ca = 0;
  for (int r = 0; r < target.n_residues; ++r)
    target_ca += target.present[static_cast<std::size_t>(atom_row(r, BackboneAtom::CA))] ? 1 : 0;
  std::vector<double> sq;
  sq.reserve(rows.size());
  for (int row : rows) sq.push_back((pred.coords.row(row) - target.coords.row(row)).squaredNorm());
  std::sort(sq.begin(), sq.end());
  std::vector<CompletenessPoint> curve;
  double sum = 0.0;
  for (std::size_t k = 0; k < sq.size(); ++k) {
    sum += sq[k];
    curve.push_back({static_cast<double>(k + 1) / target_ca, std::sqrt(sum / static_cast<double>(k + 1))});
  }
  return curve;
}

void write_metrics_csv(const std::vector<MetricRecord>& records, std::ostream& out) {
  out << "replica,task,rmsd,completeness,loss\n";
  for (const auto& r : records)
    out << r.replica << ',' << r.task << ',' << format_double(r.rmsd) << ',' << format_double(r.completeness)
        << ',' << format_double(r.loss) << '\n';
}

void write_completeness_csv(const std::vector<std::pair<std::string, std::vector<CompletenessPoint>>>& curves,
                            std::ostream& out) {
  out << "model,completeness,rmsd\n";
  for (const auto& [name, curve] : curves)
    for (const auto& p : curve) out << name << ',' << format_double(p.completeness) << ',' << format_double(p.rmsd) << '\n';
}

}  // namespace adp
