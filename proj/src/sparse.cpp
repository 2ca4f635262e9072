#include "hygraph/sparse.hpp"

#include <algorithm>

#include "hygraph/errors.hpp"

namespace hygraph {

bool CsrPattern::contains(std::size_t r, std::size_t c) const {
    if (r >= n_rows) return false;
    auto first = cols.begin() + static_cast<std::ptrdiff_t>(offsets[r]);
    auto last = cols.begin() + static_cast<std::ptrdiff_t>(offsets[r + 1]);
    return std::binary_search(first, last, c);
}

CsrPattern CsrPattern::from_pairs(std::size_t n_rows, std::size_t n_cols,
                                  std::vector<std::pair<std::size_t, std::size_t>> pairs) {
    for (const auto& [r, c] : pairs)
        if (r >= n_rows || c >= n_cols)
            throw DimensionError("CsrPattern: entry (" + std::to_string(r) + "," +
                                 std::to_string(c) + ") outside " + std::to_string(n_rows) + "x" +
                                 std::to_string(n_cols));
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    CsrPattern p;
    p.n_rows = n_rows;
    p.n_cols = n_cols;
    p.offsets.assign(n_rows + 1, 0);
    p.cols.reserve(pairs.size());
    for (const auto& [r, c] : pairs) {
        ++p.offsets[r + 1];
        p.cols.push_back(c);
    }
    for (std::size_t r = 0; r < n_rows; ++r) p.offsets[r + 1] += p.offsets[r];
    return p;
}

CsrPattern CsrPattern::identity(std::size_t n) {
    CsrPattern p;
    p.n_rows = p.n_cols = n;
    p.offsets.resize(n + 1);
    p.cols.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        p.offsets[i + 1] = i + 1;
        p.cols[i] = i;
    }
    return p;
}

CsrPattern CsrPattern::transposed() const {
    std::vector<std::pair<std::size_t, std::size_t>> t;
    t.reserve(nnz());
    for (std::size_t r = 0; r < n_rows; ++r)
        for (std::size_t e = offsets[r]; e < offsets[r + 1]; ++e) t.emplace_back(cols[e], r);
    return from_pairs(n_cols, n_rows, std::move(t));
}

std::vector<std::pair<std::size_t, std::size_t>> CsrPattern::pairs() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(nnz());
    for (std::size_t r = 0; r < n_rows; ++r)
        for (std::size_t e = offsets[r]; e < offsets[r + 1]; ++e) out.emplace_back(r, cols[e]);
    return out;
}

}  // namespace hygraph
