// Writes a random synthetic backbone, or a noisy partial copy of one, as PDB.
#include <adp/error.hpp>
#include <adp/pdb.hpp>
#include <adp/synthetic.hpp>

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Synthetic backbone generator"};
  int residues = 64;
  std::uint64_t seed = 0;
  std::string out = "target.pdb";
  std::string partial_from;
  double delete_fraction = 0.2;
  double noise = 0.5;
  app.add_option("-n,--residues", residues, "Chain length")->capture_default_str();
  app.add_option("--seed", seed, "Random seed")->capture_default_str();
  app.add_option("-o,--out", out, "Output PDB")->capture_default_str();
  app.add_option("--partial-from", partial_from, "Make a partial model of this PDB instead");
  app.add_option("--delete", delete_fraction, "Fraction of residues removed (--partial-from)")->capture_default_str();
  app.add_option("--noise", noise, "Coordinate noise in Angstrom (--partial-from)")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  try {
    const adp::BackboneChain chain = partial_from.empty()
                                         ? adp::synthetic_backbone(residues, seed)
                                         : adp::partial_model(adp::read_backbone(partial_from), delete_fraction, noise, seed);
    adp::write_backbone(chain, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
