#include "crcal/clifford.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "crcal/errors.hpp"

namespace crcal {

namespace {

// Single-qubit letters 0..3 = I, X, Y, Z as X^x Z^z with a phase convention
// P(x,z) = i^{xz} X^x Z^z, so products track powers of i exactly.
int letter_x(int l) { return l == 1 || l == 2; }
int letter_z(int l) { return l == 2 || l == 3; }
int letter_from_xz(int x, int z) { return x ? (z ? 2 : 1) : (z ? 3 : 0); }

void mul1(int a, int b, int& out, int& phase4) {
  const int x1 = letter_x(a), z1 = letter_z(a);
  const int x2 = letter_x(b), z2 = letter_z(b);
  const int x3 = x1 ^ x2, z3 = z1 ^ z2;
  out = letter_from_xz(x3, z3);
  phase4 += x1 * z1 + x2 * z2 - x3 * z3 + 2 * (z1 & x2);
}

// Product of two-qubit Paulis: indices in pauli2 ordering, phase in i^k.
void mul2(int a, int b, int& out, int& phase4) {
  int oc = 0, ot = 0;
  mul1(a / 4, b / 4, oc, phase4);
  mul1(a % 4, b % 4, ot, phase4);
  out = 4 * oc + ot;
}

// Image of a single letter on one qubit (q = 0 control, 1 target) under the
// tableau, as (two-qubit pauli, sign).
void letter_image(const CliffordTableau& t, int q, int letter, int& pauli,
                  int& sign) {
  if (letter == 0) {
    pauli = 0;
    sign = 1;
    return;
  }
  const int gx = 2 * q, gz = 2 * q + 1;  // generator slots X, Z of this qubit
  if (letter == 1) {
    pauli = t.image[gx];
    sign = t.sign[gx];
    return;
  }
  if (letter == 3) {
    pauli = t.image[gz];
    sign = t.sign[gz];
    return;
  }
  // Y = i X Z, so its image is i * image(X) * image(Z).
  int phase4 = 1;
  mul2(t.image[gx], t.image[gz], pauli, phase4);
  phase4 = ((phase4 % 4) + 4) % 4;
  if (phase4 != 0 && phase4 != 2)
    throw ConfigInvalid("tableau is not a valid Clifford action");
  sign = t.sign[gx] * t.sign[gz] * (phase4 == 0 ? 1 : -1);
}

}  // namespace

std::uint32_t CliffordTableau::key() const {
  std::uint32_t k = 0;
  for (int g = 0; g < 4; ++g)
    k |= std::uint32_t(image[g] * 2 + (sign[g] < 0 ? 1 : 0)) << (5 * g);
  return k;
}

std::uint32_t CliffordTableau::symplectic_key() const {
  std::uint32_t k = 0;
  for (int g = 0; g < 4; ++g) k |= std::uint32_t(image[g]) << (4 * g);
  return k;
}

void map_pauli(const CliffordTableau& t, int& pauli, int& sign) {
  const int c = pauli / 4, tt = pauli % 4;
  int pc = 0, sc = 1, pt = 0, st = 1;
  letter_image(t, 0, c, pc, sc);
  letter_image(t, 1, tt, pt, st);
  int phase4 = 0;
  int out = 0;
  mul2(pc, pt, out, phase4);
  // Both letters commute with... the product of images of commuting Paulis
  // stays Hermitian, so the phase is a sign.
  phase4 = ((phase4 % 4) + 4) % 4;
  if (phase4 != 0 && phase4 != 2)
    throw ConfigInvalid("tableau maps a Pauli to a non-Hermitian operator");
  pauli = out;
  sign *= sc * st * (phase4 == 0 ? 1 : -1);
}

CliffordTableau compose(const CliffordTableau& after, const CliffordTableau& before) {
  CliffordTableau out;
  for (int g = 0; g < 4; ++g) {
    int p = before.image[g];
    int s = before.sign[g];
    map_pauli(after, p, s);
    out.image[g] = p;
    out.sign[g] = s;
  }
  return out;
}

CliffordTableau tableau_of_unitary(const Mat& u) {
  if (u.rows() != 4 || u.cols() != 4)
    throw ConfigInvalid("tableau extraction expects a 4x4 unitary");
  static const int generators[4] = {4, 12, 1, 3};  // XI, ZI, IX, IZ
  CliffordTableau t;
  const Mat udag = u.adjoint();
  for (int g = 0; g < 4; ++g) {
    const Mat m = u * pauli2(generators[g]) * udag;
    bool found = false;
    for (int p = 0; p < 16 && !found; ++p) {
      const double overlap = (pauli2(p) * m).trace().real() / 4.0;
      if (std::abs(std::abs(overlap) - 1) < 1e-6) {
        const double sgn = overlap > 0 ? 1.0 : -1.0;
        if ((m - sgn * pauli2(p)).norm() > 1e-8)
          throw ConfigInvalid("unitary is not Clifford");
        t.image[g] = p;
        t.sign[g] = sgn > 0 ? 1 : -1;
        found = true;
      }
    }
    if (!found) throw ConfigInvalid("unitary is not Clifford");
  }
  return t;
}

CliffordGroup::CliffordGroup() {
  const double s = 1.0 / std::sqrt(2.0);
  Mat h(2, 2), sp(2, 2), id = Mat::Identity(2, 2);
  h << s, s, s, -s;
  sp << 1, 0, 0, iu;
  Mat cnot = Mat::Zero(4, 4);
  cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1;

  std::vector<CliffordElement> gens;
  for (const Mat& u : {kron(h, id), kron(id, h), kron(sp, id), kron(id, sp), cnot})
    gens.push_back({u, tableau_of_unitary(u)});

  std::unordered_map<std::uint32_t, std::size_t> seen;
  CliffordElement identity{Mat::Identity(4, 4), CliffordTableau{}};
  elements_.push_back(identity);
  seen.emplace(identity.tableau.key(), 0);
  for (std::size_t head = 0; head < elements_.size(); ++head) {
    const CliffordElement cur = elements_[head];  // copy: vector may realloc
    for (const auto& g : gens) {
      CliffordElement next{g.u * cur.u, compose(g.tableau, cur.tableau)};
      const auto key = next.tableau.key();
      if (seen.emplace(key, elements_.size()).second)
        elements_.push_back(std::move(next));
    }
  }

  key_to_index_.reserve(elements_.size());
  for (std::size_t i = 0; i < elements_.size(); ++i)
    key_to_index_.emplace_back(elements_[i].tableau.key(), std::uint32_t(i));
  std::sort(key_to_index_.begin(), key_to_index_.end());

  inverse_index_.resize(elements_.size());
  for (std::size_t i = 0; i < elements_.size(); ++i)
    inverse_index_[i] = index_of(tableau_of_unitary(elements_[i].u.adjoint()));

  std::vector<std::uint32_t> classes;
  classes.reserve(elements_.size());
  for (const auto& e : elements_) classes.push_back(e.tableau.symplectic_key());
  std::sort(classes.begin(), classes.end());
  n_classes_ = std::unique(classes.begin(), classes.end()) - classes.begin();
}

const CliffordGroup& CliffordGroup::instance() {
  static const CliffordGroup group;
  return group;
}

const CliffordElement& CliffordGroup::sample(std::mt19937_64& rng) const {
  std::uniform_int_distribution<std::size_t> dist(0, elements_.size() - 1);
  return elements_[dist(rng)];
}

std::size_t CliffordGroup::index_of(const CliffordTableau& t) const {
  const auto key = t.key();
  const auto it = std::lower_bound(
      key_to_index_.begin(), key_to_index_.end(), key,
      [](const auto& pair, std::uint32_t k) { return pair.first < k; });
  if (it == key_to_index_.end() || it->first != key)
    throw ConfigInvalid("tableau is not in the Clifford group");
  return it->second;
}

const CliffordElement& CliffordGroup::inverse_of(const CliffordTableau& t) const {
  return elements_[inverse_index_[index_of(t)]];
}

}  // namespace crcal
