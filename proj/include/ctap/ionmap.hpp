#pragma once

// Triangular-lattice hopping compiled onto a linear chain of
// M = (N+1)(N+2)/2 spins: lattice site i (canonical order) is ion i, and the
// Ising coupling J_ij equals the lattice hopping between sites i and j.

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ctap/error.hpp"
#include "ctap/tri.hpp"

namespace ctap {

struct IsingMatrix {
  RMatrix J;
  int n_bosons = 0;
  std::vector<FockSite> linearization;  ///< ion i <-> lattice site
  std::array<double, 3> rates{};

  Eigen::Index spins() const { return J.rows(); }
};

/// Symbolic coupling: rate index (1..3) times sqrt(coef_squared).
struct IsingTerm {
  int rate = 0;
  int coef_squared = 0;

  double value(const std::array<double, 3>& rates) const {
    return rates[rate - 1] * std::sqrt(static_cast<double>(coef_squared));
  }
  std::string str() const {
    const int root = static_cast<int>(std::lround(std::sqrt(coef_squared)));
    std::string coef;
    if (root * root == coef_squared)
      coef = root == 1 ? "" : std::to_string(root) + "*";
    else
      coef = "sqrt(" + std::to_string(coef_squared) + ")*";
    return coef + "Omega" + std::to_string(rate);
  }
};

inline IsingMatrix build_ising_matrix(int n_bosons, double o1, double o2, double o3) {
  const TriLattice lat(n_bosons);
  IsingMatrix im;
  im.n_bosons = n_bosons;
  im.linearization = lat.sites();
  im.rates = {o1, o2, o3};
  im.J = RMatrix::Zero(lat.site_count(), lat.site_count());
  for (const auto& b : tri_bonds(lat)) im.J(b.i, b.j) = im.J(b.j, b.i) = IsingTerm{b.rate, b.coef_squared}.value(im.rates);
  return im;
}

/// M x M table of symbolic couplings (empty where J vanishes identically).
inline std::vector<std::vector<std::optional<IsingTerm>>> ising_symbolic(int n_bosons) {
  const TriLattice lat(n_bosons);
  const auto m = static_cast<std::size_t>(lat.site_count());
  std::vector<std::vector<std::optional<IsingTerm>>> table(m, std::vector<std::optional<IsingTerm>>(m));
  for (const auto& b : tri_bonds(lat)) {
    const IsingTerm term{b.rate, b.coef_squared};
    table[b.i][b.j] = term;
    table[b.j][b.i] = term;
  }
  return table;
}

inline constexpr int kMaxSingleExcitationN = 3;

struct SingleExcitationReport {
  RMatrix flip_flop_block;  ///< spin Hamiltonian restricted to one excitation
  RMatrix lattice;          ///< triangular-lattice Hamiltonian
  double max_deviation = 0.0;
};

/// Applies every sigma_x^i sigma_x^j term to each one-excitation basis state
/// and keeps the one-excitation part of the result. Only the flip-flop terms
/// survive this restriction; the doubly-raising terms leave the sector and
/// are dropped.
inline SingleExcitationReport verify_single_excitation(int n_bosons, double o1, double o2, double o3,
                                                       int max_n = kMaxSingleExcitationN) {
  if (n_bosons > max_n)
    throw ValidationError("single-excitation check is capped at N = " + std::to_string(max_n));
  const auto im = build_ising_matrix(n_bosons, o1, o2, o3);
  const auto m = static_cast<int>(im.spins());
  if (m > 63) throw ValidationError("spin chain too long for the bitmask representation");

  SingleExcitationReport rep;
  rep.flip_flop_block = RMatrix::Zero(m, m);
  for (int a = 0; a < m; ++a) {
    const std::uint64_t ket = std::uint64_t{1} << a;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        if (im.J(i, j) == 0.0) continue;
        const std::uint64_t out = ket ^ (std::uint64_t{1} << i) ^ (std::uint64_t{1} << j);
        if (std::popcount(out) != 1) continue;
        rep.flip_flop_block(std::countr_zero(out), a) += im.J(i, j);
      }
  }
  rep.lattice = build_tri_hamiltonian(n_bosons, o1, o2, o3);
  rep.max_deviation = (rep.flip_flop_block - rep.lattice).cwiseAbs().maxCoeff();
  return rep;
}

/// CSV with `#` comment header (N, rates, linearization), a label row, then
/// one row per ion.
inline void write_ising_csv(std::ostream& os, const IsingMatrix& im, bool symbolic = false) {
  os << "# N=" << im.n_bosons << '\n';
  os.precision(17);
  os << "# omega1=" << im.rates[0] << ",omega2=" << im.rates[1] << ",omega3=" << im.rates[2] << '\n';
  os << "# linearization:";
  for (std::size_t i = 0; i < im.linearization.size(); ++i)
    os << ' ' << (i + 1) << "=(" << im.linearization[i].n << ';' << im.linearization[i].m << ')';
  os << '\n';
  os << "ion";
  for (Eigen::Index j = 1; j <= im.spins(); ++j) os << ",j" << j;
  os << '\n';
  const auto table = symbolic ? ising_symbolic(im.n_bosons) : decltype(ising_symbolic(0)){};
  for (Eigen::Index i = 0; i < im.spins(); ++i) {
    os << (i + 1);
    for (Eigen::Index j = 0; j < im.spins(); ++j) {
      os << ',';
      if (symbolic) {
        const auto& t = table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        os << (t ? t->str() : "0");
      } else {
        os << im.J(i, j);
      }
    }
    os << '\n';
  }
}

}  // namespace ctap
