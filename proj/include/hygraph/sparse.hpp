#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace hygraph {

// Boolean sparsity pattern in compressed-row form. Column indices are sorted within each row.
struct CsrPattern {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::size_t> offsets{0};  // n_rows + 1 entries
    std::vector<std::size_t> cols;

    std::size_t nnz() const { return cols.size(); }
    std::size_t degree(std::size_t r) const { return offsets[r + 1] - offsets[r]; }
    bool contains(std::size_t r, std::size_t c) const;

    // Builds from (row, col) pairs; duplicates are merged.
    static CsrPattern from_pairs(std::size_t n_rows, std::size_t n_cols,
                                 std::vector<std::pair<std::size_t, std::size_t>> pairs);
    static CsrPattern identity(std::size_t n);

    CsrPattern transposed() const;
    std::vector<std::pair<std::size_t, std::size_t>> pairs() const;

    friend bool operator==(const CsrPattern&, const CsrPattern&) = default;
};

}  // namespace hygraph
