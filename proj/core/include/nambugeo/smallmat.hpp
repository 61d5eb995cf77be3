#pragma once

#include <cstddef>
#include <vector>

// Small dense matrices for dimensions that never exceed a few dozen.
// Row-major storage, sizes fixed at construction.

namespace nambugeo {

class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static Mat identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    Mat transposed() const;

    Mat& operator+=(const Mat& o);
    Mat& operator-=(const Mat& o);
    Mat& operator*=(double s);

    friend Mat operator*(const Mat& a, const Mat& b);
    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
    friend Mat operator*(double s, Mat a) { return a *= s; }

    double trace() const;

    // Largest absolute entry, handy for residual checks.
    double max_abs() const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

using Vec = std::vector<double>;

double dot(const Vec& x, const Vec& y);
Vec mat_vec(const Mat& m, const Vec& x);

// Determinant via LU with full pivoting. Exact zero for structurally
// singular input is fine; no tolerance is applied.
double determinant(Mat m);

// Solves a x = b with full-pivot LU. Throws std::domain_error when a pivot
// underflows to zero (singular matrix).
Vec solve(Mat a, Vec b);

// Inverse via repeated solves against unit vectors.
Mat inverse(const Mat& a);

struct EigenResult {
    Vec values;   // ascending
    Mat vectors;  // column k is the eigenvector for values[k]
};

// Cyclic Jacobi for symmetric matrices. Sweeps until every off-diagonal
// entry falls below 1e-13 (relative to the largest diagonal magnitude),
// capped at 100 sweeps.
EigenResult jacobi_eigen(Mat a);

}  // namespace nambugeo
