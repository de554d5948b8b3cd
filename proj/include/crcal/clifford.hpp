#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "crcal/linalg.hpp"

namespace crcal {

// Conjugation action on the Pauli group: images of the four generators
// XI, ZI, IX, IZ as a two-qubit Pauli index (pauli2 ordering) and a sign.
struct CliffordTableau {
  std::array<int, 4> image{4, 12, 1, 3};  // identity: XI, ZI, IX, IZ
  std::array<int, 4> sign{1, 1, 1, 1};

  bool operator==(const CliffordTableau&) const = default;
  // Dense key: 4 generators x (16 paulis x 2 signs).
  std::uint32_t key() const;
  // Key with signs stripped (the symplectic class).
  std::uint32_t symplectic_key() const;
};

// Image of an arbitrary Pauli (index, sign) under the tableau.
void map_pauli(const CliffordTableau& t, int& pauli, int& sign);

// Tableau of `after * before` (apply `before` first).
CliffordTableau compose(const CliffordTableau& after, const CliffordTableau& before);

// Extracts the tableau of an exact 4x4 Clifford unitary by conjugating the
// generators; throws ConfigInvalid if u is not Clifford to 1e-8.
CliffordTableau tableau_of_unitary(const Mat& u);

struct CliffordElement {
  Mat u;  // exact 4x4 unitary, control-first qubit ordering
  CliffordTableau tableau;
};

// The full two-qubit Clifford group (11,520 elements), enumerated once by
// closure over {H, S on each qubit; CNOT} with tableau-keyed deduplication.
class CliffordGroup {
 public:
  static const CliffordGroup& instance();

  std::size_t size() const { return elements_.size(); }
  const CliffordElement& operator[](std::size_t i) const { return elements_[i]; }
  const CliffordElement& sample(std::mt19937_64& rng) const;

  std::size_t index_of(const CliffordTableau& t) const;
  // Element undoing the given accumulated tableau.
  const CliffordElement& inverse_of(const CliffordTableau& t) const;

  std::size_t symplectic_classes() const { return n_classes_; }

 private:
  CliffordGroup();
  std::vector<CliffordElement> elements_;
  std::vector<std::size_t> inverse_index_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> key_to_index_;  // sorted
  std::size_t n_classes_ = 0;
};

}  // namespace crcal
