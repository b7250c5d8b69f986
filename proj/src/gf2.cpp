#include "flagprep/gf2.hpp"

#include <algorithm>
#include <bit>

namespace flagprep {

BitVector BitVector::from_string(std::string_view s) {
    BitVector v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '1') v.set(i);
        else if (s[i] != '0') throw std::invalid_argument("bit string must contain only 0/1");
    }
    return v;
}

BitVector BitVector::from_indices(std::size_t n, const std::vector<std::size_t>& idx) {
    BitVector v(n);
    for (auto i : idx) {
        if (i >= n) throw std::out_of_range("bit index out of range");
        v.set(i);
    }
    return v;
}

void BitVector::clear() { std::fill(words_.begin(), words_.end(), 0); }

std::size_t BitVector::popcount() const {
    std::size_t c = 0;
    for (auto w : words_) c += std::popcount(w);
    return c;
}

bool BitVector::any() const {
    for (auto w : words_)
        if (w) return true;
    return false;
}

bool BitVector::dot(const BitVector& o) const {
    uint64_t acc = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) acc ^= words_[i] & o.words_[i];
    return std::popcount(acc) & 1;
}

std::vector<std::size_t> BitVector::ones() const {
    std::vector<std::size_t> out;
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
        uint64_t w = words_[wi];
        while (w) {
            out.push_back(wi * 64 + std::countr_zero(w));
            w &= w - 1;
        }
    }
    return out;
}

std::string BitVector::to_string() const {
    std::string s(n_, '0');
    for (std::size_t i = 0; i < n_; ++i)
        if (get(i)) s[i] = '1';
    return s;
}

BitVector& BitVector::operator^=(const BitVector& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
    return *this;
}
BitVector& BitVector::operator&=(const BitVector& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
}
BitVector& BitVector::operator|=(const BitVector& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
}

bool BitVector::operator<(const BitVector& o) const {
    if (n_ != o.n_) return n_ < o.n_;
    for (std::size_t i = 0; i < n_; ++i)
        if (get(i) != o.get(i)) return o.get(i);
    return false;
}

std::size_t BitVector::hash() const {
    uint64_t h = 0x9e3779b97f4a7c15ULL ^ n_;
    for (auto w : words_) {
        h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
}

GF2Matrix::GF2Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows, BitVector(cols)) {}

GF2Matrix GF2Matrix::identity(std::size_t n) {
    GF2Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i);
    return m;
}

GF2Matrix GF2Matrix::from_rows(const std::vector<BitVector>& rows, std::size_t cols) {
    GF2Matrix m(0, cols);
    for (const auto& r : rows) m.append_row(r);
    return m;
}

GF2Matrix GF2Matrix::from_strings(const std::vector<std::string>& rows) {
    std::size_t cols = rows.empty() ? 0 : rows[0].size();
    GF2Matrix m(0, cols);
    for (const auto& s : rows) {
        if (s.size() != cols) throw std::invalid_argument("ragged matrix rows");
        m.append_row(BitVector::from_string(s));
    }
    return m;
}

BitVector GF2Matrix::column(std::size_t c) const {
    BitVector v(rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        if (get(r, c)) v.set(r);
    return v;
}

void GF2Matrix::append_row(const BitVector& r) {
    if (r.size() != cols_) throw std::invalid_argument("row length mismatch");
    data_.push_back(r);
    ++rows_;
}

GF2Matrix GF2Matrix::transpose() const {
    GF2Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (auto c : data_[r].ones()) t.set(c, r);
    return t;
}

GF2Matrix GF2Matrix::select_columns(const std::vector<std::size_t>& cols) const {
    GF2Matrix s(rows_, cols.size());
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t j = 0; j < cols.size(); ++j)
            if (get(r, cols[j])) s.set(r, j);
    return s;
}

GF2Matrix GF2Matrix::operator*(const GF2Matrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("dimension mismatch in multiply");
    GF2Matrix p(rows_, o.cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (auto k : data_[r].ones()) p.data_[r] ^= o.data_[k];
    return p;
}

BitVector GF2Matrix::operator*(const BitVector& v) const {
    if (v.size() != cols_) throw std::invalid_argument("dimension mismatch in multiply");
    BitVector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        if (data_[r].dot(v)) out.set(r);
    return out;
}

bool GF2Matrix::is_identity() const {
    return rows_ == cols_ && *this == identity(rows_);
}

std::size_t GF2Matrix::popcount() const {
    std::size_t c = 0;
    for (const auto& r : data_) c += r.popcount();
    return c;
}

std::string GF2Matrix::to_string() const {
    std::string s;
    for (const auto& r : data_) {
        s += r.to_string();
        s += '\n';
    }
    return s;
}

RrefResult rref_with_transform(const GF2Matrix& m) {
    RrefResult res{m, {}, GF2Matrix::identity(m.rows())};
    auto& R = res.reduced;
    auto& T = res.transform;
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        std::size_t p = r;
        while (p < m.rows() && !R.get(p, c)) ++p;
        if (p == m.rows()) continue;
        R.swap_rows(r, p);
        T.swap_rows(r, p);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i != r && R.get(i, c)) {
                R.add_row(i, r);
                T.add_row(i, r);
            }
        }
        res.pivots.push_back(c);
        ++r;
    }
    return res;
}

std::size_t rank(const GF2Matrix& m) {
    RowSpace rs(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) rs.insert(m.row(i));
    return rs.dimension();
}

GF2Matrix invert(const GF2Matrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("invert requires a square matrix");
    auto res = rref_with_transform(m);
    if (res.pivots.size() != m.rows()) throw SingularMatrix("matrix is singular over GF(2)");
    return res.transform;
}

BitVector RowSpace::reduce(BitVector v) const {
    for (std::size_t i = 0; i < basis_.size(); ++i)
        if (v.get(lead_[i])) v ^= basis_[i];
    return v;
}

bool RowSpace::contains(const BitVector& v) const { return reduce(v).none(); }

bool RowSpace::insert(const BitVector& v) {
    if (v.size() != n_) throw std::invalid_argument("row length mismatch");
    BitVector r = reduce(v);
    auto ones = r.ones();
    if (ones.empty()) return false;
    std::size_t lead = ones.front();
    // Keep basis fully reduced on lead positions so reduce() is a single pass.
    for (auto& b : basis_)
        if (b.get(lead)) b ^= r;
    basis_.push_back(std::move(r));
    lead_.push_back(lead);
    return true;
}

}  // namespace flagprep
