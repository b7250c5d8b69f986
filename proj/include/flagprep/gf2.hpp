#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flagprep {

class SingularMatrix : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fixed-length bit vector packed into 64-bit words. Bits past size() are kept zero.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

    static BitVector from_string(std::string_view s);  // '1'/'0' per position
    static BitVector from_indices(std::size_t n, const std::vector<std::size_t>& idx);

    std::size_t size() const { return n_; }
    std::size_t num_words() const { return words_.size(); }
    const uint64_t* words() const { return words_.data(); }
    uint64_t* words() { return words_.data(); }

    bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1ULL; }
    void set(std::size_t i, bool v = true) {
        uint64_t m = 1ULL << (i & 63);
        if (v) words_[i >> 6] |= m; else words_[i >> 6] &= ~m;
    }
    void flip(std::size_t i) { words_[i >> 6] ^= 1ULL << (i & 63); }
    void clear();

    std::size_t popcount() const;
    bool any() const;
    bool none() const { return !any(); }
    // Parity of popcount(*this & o).
    bool dot(const BitVector& o) const;
    std::vector<std::size_t> ones() const;
    std::string to_string() const;

    BitVector& operator^=(const BitVector& o);
    BitVector& operator&=(const BitVector& o);
    BitVector& operator|=(const BitVector& o);
    friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }
    friend BitVector operator&(BitVector a, const BitVector& b) { return a &= b; }
    friend BitVector operator|(BitVector a, const BitVector& b) { return a |= b; }
    bool operator==(const BitVector& o) const { return n_ == o.n_ && words_ == o.words_; }
    bool operator!=(const BitVector& o) const { return !(*this == o); }
    bool operator<(const BitVector& o) const;

    std::size_t hash() const;

private:
    std::size_t n_ = 0;
    std::vector<uint64_t> words_;
};

class GF2Matrix {
public:
    GF2Matrix() = default;
    GF2Matrix(std::size_t rows, std::size_t cols);

    static GF2Matrix identity(std::size_t n);
    static GF2Matrix from_rows(const std::vector<BitVector>& rows, std::size_t cols);
    // Rows given as strings of '0'/'1'.
    static GF2Matrix from_strings(const std::vector<std::string>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    bool get(std::size_t r, std::size_t c) const { return data_[r].get(c); }
    void set(std::size_t r, std::size_t c, bool v = true) { data_[r].set(c, v); }
    const BitVector& row(std::size_t r) const { return data_[r]; }
    BitVector& row(std::size_t r) { return data_[r]; }
    BitVector column(std::size_t c) const;

    void add_row(std::size_t dst, std::size_t src) { data_[dst] ^= data_[src]; }
    void swap_rows(std::size_t a, std::size_t b) { std::swap(data_[a], data_[b]); }
    void append_row(const BitVector& r);

    GF2Matrix transpose() const;
    GF2Matrix select_columns(const std::vector<std::size_t>& cols) const;
    GF2Matrix operator*(const GF2Matrix& o) const;
    BitVector operator*(const BitVector& v) const;  // M·v
    bool operator==(const GF2Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }
    bool operator!=(const GF2Matrix& o) const { return !(*this == o); }

    bool is_identity() const;
    std::size_t popcount() const;
    std::string to_string() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<BitVector> data_;
};

struct RrefResult {
    GF2Matrix reduced;
    std::vector<std::size_t> pivots;
    GF2Matrix transform;  // transform * M == reduced
};

RrefResult rref_with_transform(const GF2Matrix& m);
std::size_t rank(const GF2Matrix& m);
GF2Matrix invert(const GF2Matrix& m);

// Incremental row-space membership: maintains a reduced basis keyed by leading bit.
class RowSpace {
public:
    explicit RowSpace(std::size_t n) : n_(n) {}
    // Returns true if v was independent and has been added.
    bool insert(const BitVector& v);
    bool contains(const BitVector& v) const;
    BitVector reduce(BitVector v) const;
    std::size_t dimension() const { return basis_.size(); }
    const std::vector<BitVector>& basis() const { return basis_; }

private:
    std::size_t n_;
    std::vector<BitVector> basis_;
    std::vector<std::size_t> lead_;
};

}  // namespace flagprep

template <>
struct std::hash<flagprep::BitVector> {
    std::size_t operator()(const flagprep::BitVector& v) const { return v.hash(); }
};
