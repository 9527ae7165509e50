#pragma once

#include "circlefact/core_maps.hpp"

#include <cstdint>
#include <utility>

namespace circlefact {

struct WordFactor {
    unsigned n = 1;
    cplx w{};
};

// Rot(rotation) o phi_{i_1}(w_1) o ... o phi_{i_k}(w_k); the rightmost
// factor is applied first.
struct FiniteTypeWord {
    cplx rotation{1.0, 0.0};
    std::vector<WordFactor> factors;

    bool is_canonical() const;
    // Lift of the word; the rotation contributes arg(rotation).
    CompositionChain chain() const;
};

// Element of a word that may interleave rotations: index 0 marks a
// rotation by `value`, otherwise phi_index(value).
struct WordElement {
    unsigned index = 0;
    cplx value{1.0, 0.0};

    static WordElement rot(cplx lambda) { return {0, lambda}; }
    static WordElement phi(unsigned n, cplx w) { return {n, w}; }
};

FiniteTypeWord word_push_rotation_left(const std::vector<WordElement>& elements);

struct MergeResult {
    cplx rotation;
    cplx w;
    bool fitted = false;
};

// phi_n(w) o phi_n(w') = Rot(rotation) o phi_n(result.w).
MergeResult merge_factors(unsigned n, cplx w, cplx w_prime);

FiniteTypeWord word_reduce(const FiniteTypeWord& word);

std::uint64_t word_degree(const FiniteTypeWord& word);
std::uint64_t word_degree(const std::vector<unsigned>& indices);

std::pair<std::uint64_t, std::uint64_t> genus_phi_n(unsigned n);
std::int64_t genus_pair(unsigned m, unsigned n);

CircleLift word_eval(const FiniteTypeWord& word, const std::vector<double>& thetas);

} // namespace circlefact
